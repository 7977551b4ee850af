"""Smoke test for the ppgbench Python extension.

Build and install first:  pip install --no-build-isolation ./crates/python
"""

import math
import tempfile
from pathlib import Path

import ppgbench


def check(cond, msg):
    if not cond:
        raise SystemExit(f"FAIL: {msg}")
    print(f"ok   {msg}")


def main():
    fs = 125.0
    t = [i / fs for i in range(1250)]
    sine = [math.sin(2 * math.pi * 5 * x) for x in t]
    down = ppgbench.resample_fourier(sine, 500)
    err = max(abs(v - math.sin(2 * math.pi * 5 * i / 50.0)) for i, v in enumerate(down))
    check(len(down) == 500 and err < 1e-6, "resample 125 Hz sine to 50 Hz")

    z = ppgbench.zscore([1.0, 2.0, 3.0])
    check(abs(z[2] - math.sqrt(1.5)) < 1e-12, "zscore hand case")

    pulses = [sum(math.exp(-0.5 * ((x - c - 0.5) / 0.05) ** 2) for c in range(10)) for x in t]
    idx, prom = ppgbench.detect_systolic_peaks(ppgbench.zscore(pulses, fs), fs)
    check(len(idx) == 10, "ten planted pulses detected")

    tpl, n = ppgbench.extract_beat_template(pulses, fs, idx)
    check(len(tpl) == 100 and n == 9, "beat template length and count")

    f = ppgbench.hrv_features([0.8, 0.9, 0.8, 0.9], 5)
    check(abs(f["ibi_mean"] - 0.85) < 1e-12 and f["pnn50"] == 1.0, "HRV hand case")
    check(ppgbench.segment_features(pulses, fs) is not None, "segment features")

    x = [[float(i), float(i % 3)] for i in range(20)]
    y = [2.0 * r[0] - r[1] + 1.0 for r in x]
    m = ppgbench.RidgeModel.fit(x, y)
    check(m.alpha in (0.01, 0.1, 1.0, 10.0, 100.0, 1000.0), "ridge alpha from grid")
    check(abs(m.predict([[5.0, 2.0]])[0] - 9.0) < 0.5, "ridge prediction")

    r, p = ppgbench.pearson_with_p([1.0, 2.0, 3.0, 4.0, 5.0], [2.0, 1.0, 4.0, 3.0, 5.0])
    check(abs(r - 0.8) < 1e-12 and 0.0 < p < 1.0, "pearson with p")

    with tempfile.TemporaryDirectory() as d:
        ids = ppgbench.synth_population(d, n_subjects=30, seed=3)
        check(len(ids) == 30, "synthetic population written")
        sid, fs_store, segs = ppgbench.read_segment_store(str(Path(d) / "segments" / f"{ids[0]}.ppgs"))
        check(sid == ids[0] and fs_store == 125.0 and len(segs[0]) == 1250, "PPGS store readable")
        rep = ppgbench.evaluate(d, "ppg_demog", embeddings="synth", folds=5)
        base = ppgbench.evaluate(d, "baseline")
        check(rep.n_subjects == 30 and rep.mae < base.mae, "ppg_demog beats baseline")
        print(rep)

    print("all smoke checks passed")


if __name__ == "__main__":
    main()

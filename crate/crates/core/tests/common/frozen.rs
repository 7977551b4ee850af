// Reference values frozen from scipy.signal.resample and mpmath (50 digits).
// Inputs: x[i] = sin(0.37 i) + 0.3 cos(1.3 i^1.1) + 0.05 i.

pub fn resample_input(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64;
            (0.37 * t).sin() + 0.3 * (1.3 * t.powf(1.1)).cos() + 0.05 * t
        })
        .collect()
}

/// `(source_len, target_len, expected)`
pub const RESAMPLE_CASES: &[(usize, usize, &[f64])] = &[
    (8, 5, &[0.5141284798542769, 0.3924373622973379, 1.123933698932762, 1.3362702024567743, 0.8036893991046647]),
    (8, 6, &[0.36597382671751616, 0.5070845496204301, 0.6809762305736772, 1.5475589644290526, 1.0108614688860138, 0.8920959309482894]),
    (9, 4, &[0.5280976980806439, 0.6331740826419825, 1.3615815655506818, 0.830438852160583]),
    (9, 6, &[0.3691243870668191, 0.5028326741263225, 0.8964605412086428, 1.5205548765645063, 0.7724642875084822, 0.9685015311760636]),
    (7, 12, &[0.30000000000000016, 0.37598995804865243, 0.5195768156254297, 0.5062468466790069, 0.5398365765907123, 0.8741374941118772, 1.3109681272791167, 1.4853951045980882, 1.3825345832073301, 1.186173952972148, 0.902167287692819, 0.5271400339856348]),
    (6, 10, &[0.3000000000000001, 0.3425245181047122, 0.5304872972084678, 0.49737234024279015, 0.5866968773362903, 0.9401543978974266, 1.3004606529630343, 1.5402410217273763, 1.4348850093600904, 0.832237558895577]),
    (6, 9, &[0.29999999999999993, 0.3693014801974427, 0.537427944066423, 0.4929920516485343, 0.7253598999214355, 1.151213334212504, 1.4815851377115363, 1.50532687838218, 0.9113469802221315]),
    (10, 16, &[0.3000000000000001, 0.4881207617674484, 0.4725237251327922, 0.47321651013349586, 0.6555654744611731, 1.0229569922918214, 1.3971624943794003, 1.4991528269212278, 1.276439136431623, 0.9428888180951388, 0.7534299184966247, 0.8496818256327061, 1.0103329249389457, 0.7895640352236196, 0.27887054975278, 0.07874245352788059]),
    (16, 10, &[0.36674892687923666, 0.4844864709414526, 1.042781557057387, 1.4102144110873025, 0.7394516030445801, 0.8963822807523835, -0.2333196461336838, 0.004454299808933027, -0.6026279408619264, 0.08822814527387357]),
    (5, 5, &[0.30000000000000004, 0.49186508055233813, 0.49299205164853427, 0.9401543978974264, 1.4815851377115365]),
    (12, 7, &[0.3924982508440581, 0.4175456951592044, 1.2572638607206497, 1.1758746474966866, 0.8566456585184931, 0.5225875376259917, -0.30758539692238374]),
];

/// `(r, df, two-sided p)`
pub const PVALUE_CASES: &[(f64, f64, f64)] = &[
    (0.10343207233146884, 1.0, 0.9340351216597259),
    (0.8246415651117386, 2.0, 0.17535843488826142),
    (0.9718315142434192, 3.0, 0.0056511332634848355),
    (0.23641211319290292, 5.0, 0.6097754097209469),
    (0.040749049184625116, 8.0, 0.9110093207205838),
    (-0.5996207331238645, 17.0, 0.00665569179239583),
    (-0.3421355411827839, 30.0, 0.055275520899765375),
    (-0.8657855626057505, 58.0, 4.362397749254166e-19),
    (-0.3663991315336321, 120.0, 3.315495895336479e-05),
    (0.10903947722968224, 497.0, 0.01481300626131179),
    (0.8334278882159931, 903.0, 8.316728811539884e-235),
    (0.9695710816909142, 1.0, 0.15745114846837543),
    (0.23203923052876416, 2.0, 0.7679607694712358),
    (0.02427991694429061, 3.0, 0.9690888872615876),
    (-0.6125692359150244, 5.0, 0.14364577646114224),
    (-0.343327680523272, 8.0, 0.33141216917604877),
    (-0.8579431311946599, 17.0, 2.6405936663344436e-06),
    (-0.3510646965920921, 30.0, 0.048824069045286536),
    (0.11461605369819255, 58.0, 0.3832003146796111),
    (0.8419785785593659, 120.0, 5.952868275529026e-34),
    (0.9670365249891211, 497.0, 2.049393406053815e-297),
    (0.22760074405499087, 903.0, 4.249292132196827e-12),
    (0.007803920110218596, 1.0, 0.9950318197269898),
    (-0.6253445487009884, 2.0, 0.37465545129901157),
    (-0.34442275177857495, 3.0, 0.5702988579789185),
    (-0.8498581358958697, 5.0, 0.01544726571942955),
    (-0.3356310061002203, 8.0, 0.34307261000227424),
    (0.12016022508696338, 17.0, 0.6241409181903448),
    (0.850291218628834, 30.0, 7.285201820822379e-10),
    (0.9642285607262443, 58.0, 3.879301021426356e-35),
    (0.22309790865258358, 120.0, 0.013509629084214415),
    (-0.008674283104595799, 497.0, 0.8467346061566496),
    (-0.637943059552922, 903.0, 1.4526661542597883e-104),
    (-0.34542044534222704, 1.0, 0.7754726286687167),
    (-0.8415328625577326, 2.0, 0.15846713744226737),
    (-0.3201024235826278, 3.0, 0.5995043008153589),
    (0.1256704239077589, 5.0, 0.7883359463910282),
    (0.8583634582146715, 8.0, 0.0014787273329095517),
    (0.9611479827902498, 17.0, 6.19481501079344e-11),
    (0.21853199739573795, 30.0, 0.22951469300542532),
    (-0.025150033863348298, 58.0, 0.8487266421414205),
    (-0.6503612065287082, 120.0, 5.193705917582999e-16),
    (-0.3463204791390873, 497.0, 1.6575255638701275e-15),
    (-0.8329696649617415, 903.0, 2.5694764438978875e-234),
    (-0.3044833393924881, 1.0, 0.8030324102722441),
    (0.13114509227731055, 2.0, 0.8688549077226895),
    (0.8661930150749108, 3.0, 0.05756221194641403),
    (0.9577956621444149, 5.0, 0.0006869988899243405),
    (0.2139043011919106, 8.0, 0.5529124928204009),
    (-0.04161867402260553, 17.0, 0.8656643105047248),
    (-0.662595478680009, 30.0, 3.602601813624918e-05),
    (-0.34712259870509016, 58.0, 0.006581841427301054),
    (-0.8241709641570633, 120.0, 2.056506588596346e-31),
    (-0.2887781694702591, 497.0, 4.857642460786251e-11),
    (0.13658268235777885, 903.0, 3.747803730878357e-05),
    (0.8737776755806118, 1.0, 0.3233261958040668),
    (0.9541725465810801, 2.0, 0.04582745341891992),
    (0.2092161284168412, 3.0, 0.7355740351312767),
    (-0.05807554744931165, 5.0, 0.9015740686101064),
    (-0.6746424170449119, 8.0, 0.03235875178990558),
    (-0.34782657725919097, 17.0, 0.14450064665488335),
    (-0.8151392477760301, 30.0, 1.3434794192800802e-08),
    (-0.27299135409516595, 58.0, 0.034826884445727346),
    (0.14198165679436528, 120.0, 0.11875787877195713),
    (0.8811152953416873, 497.0, 9.317463580653929e-164),
    (0.9502796604536823, 903.0, 0.0),
    (0.20446880454465197, 1.0, 0.8689066094891135),
    (-0.07451600133717956, 2.0, 0.9254839986628205),
    (-0.6864986156258649, 3.0, 0.20050920948800408),
    (-0.3484322157674801, 5.0, 0.4437259679984851),
    (-0.8058770693308215, 8.0, 0.0048793360333191866),
    (-0.2571273566298569, 17.0, 0.28791721527388375),
    (0.14734048914996764, 30.0, 0.4209760710512025),
    (0.8882037998132075, 58.0, 3.0041838632822482e-21),
    (0.9461181043871487, 120.0, 1.323752595364379e-60),
    (0.19966367177308236, 497.0, 6.9800903826524055e-06),
    (-0.09093538752215558, 903.0, 0.00619040311129772),
    (-0.698160722352652, 1.0, 0.5080041762990394),
    (-0.3489393429994582, 2.0, 0.6510606570005417),
    (-0.7963870474915298, 3.0, 0.10685916510139888),
    (-0.24119066225842897, 5.0, 0.6023470457248383),
    (0.1526576643367365, 8.0, 0.673735374270489),
    (0.8950411848819185, 17.0, 2.2982111395275655e-07),
    (0.9416890549667101, 30.0, 9.841989315595225e-16),
    (0.1948020886440298, 58.0, 0.13582542987937554),
    (-0.10732906379662026, 120.0, 0.23932059031618652),
    (-0.7096254400300958, 497.0, 1.3266464783881007e-77),
    (-0.3493478155764461, 903.0, 2.2662194555077477e-27),
    (-0.7866718653457688, 1.0, 0.4236047683988087),
    (-0.22518577671840104, 2.0, 0.774814223281599),
    (0.15793167904444527, 3.0, 0.7997542202459237),
    (0.9016255174328521, 5.0, 0.005525605041746507),
    (0.9369937644052545, 8.0, 6.3869243027297e-05),
    (0.18988542965943933, 17.0, 0.4362009267133031),
    (-0.12369239522184593, 30.0, 0.5000134335280113),
    (-0.7208895272702978, 58.0, 8.286512529203034e-11),
    (-0.34965751801212197, 120.0, 7.890803029742568e-05),
    (-0.7767342696401062, 497.0, 7.519177069762343e-102),
    (-0.2091172250267724, 903.0, 2.1172257747504135e-10),
    (0.1631610421655102, 1.0, 0.8956619744604928),
];

fn main() {
    std::process::exit(ppgbench_core::cli::run(std::env::args_os()));
}

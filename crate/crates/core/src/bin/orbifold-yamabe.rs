fn main() {
    std::process::exit(orbifold_yamabe::cli::run_cli(std::env::args_os()));
}

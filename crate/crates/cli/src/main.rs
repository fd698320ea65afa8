fn main() {
    std::process::exit(acnum_cli::run_cli(std::env::args().skip(1).collect()));
}

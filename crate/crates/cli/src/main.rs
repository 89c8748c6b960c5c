fn main() {
    std::process::exit(repdiag_cli::run(std::env::args().collect()))
}

fn main() {
    std::process::exit(tjdiv_cli::run(std::env::args().collect()));
}

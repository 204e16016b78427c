fn main() {
    std::process::exit(fracpois_cli::run(std::env::args()));
}

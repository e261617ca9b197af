fn main() {
    std::process::exit(prevkit::experiments::cli::cli_main(std::env::args()));
}

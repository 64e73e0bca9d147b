fn main() {
    std::process::exit(waring_cli::run(std::env::args()));
}

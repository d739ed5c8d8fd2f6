fn main() {
    std::process::exit(shefk::cli::run(std::env::args()));
}

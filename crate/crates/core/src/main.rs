fn main() {
    std::process::exit(coexist::cli::run());
}

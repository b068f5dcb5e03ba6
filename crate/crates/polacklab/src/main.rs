fn main() {
    std::process::exit(polacklab::cli::run());
}

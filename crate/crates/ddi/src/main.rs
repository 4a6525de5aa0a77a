fn main() {
    std::process::exit(ddi::cli::run());
}

fn main() {
    std::process::exit(qepitope::cli::run());
}

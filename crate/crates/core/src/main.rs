fn main() {
    std::process::exit(vitalsel::cli::run());
}

fn main() {
    std::process::exit(primegap_cli::run());
}

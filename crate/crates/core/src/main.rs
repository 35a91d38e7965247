fn main() {
    std::process::exit(gsm::cli::main());
}

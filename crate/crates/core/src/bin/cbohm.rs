fn main() {
    std::process::exit(cbohm::cli::main())
}

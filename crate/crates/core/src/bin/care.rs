fn main() {
    std::process::exit(care::cli::main());
}

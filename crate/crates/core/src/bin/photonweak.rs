fn main() {
    std::process::exit(photonweak::cli::main());
}

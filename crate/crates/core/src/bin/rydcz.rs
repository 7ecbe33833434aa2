fn main() {
    std::process::exit(rydberg_cz::cli::main());
}

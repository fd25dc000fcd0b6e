fn main() {
    std::process::exit(monmf::cli::main());
}

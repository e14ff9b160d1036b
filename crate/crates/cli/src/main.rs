fn main() {
    std::process::exit(chargequench_cli::main_with_args(std::env::args().collect()));
}

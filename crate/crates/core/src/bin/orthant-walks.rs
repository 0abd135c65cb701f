fn main() {
    std::process::exit(orthant_walks::cli::main_with_args(std::env::args_os()));
}

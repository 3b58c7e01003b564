fn main() {
    std::process::exit(mirate::cli::main_with_args(std::env::args_os()));
}

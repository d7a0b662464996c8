fn main() {
    std::process::exit(hangover::cli::main_with_args(std::env::args_os()));
}

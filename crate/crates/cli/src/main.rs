fn main() {
    std::process::exit(brouwer_cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(mdsts_cli::main_with_args(std::env::args_os()));
}

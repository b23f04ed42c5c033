fn main() {
    std::process::exit(cqed_cli::main_with_args(std::env::args_os()));
}

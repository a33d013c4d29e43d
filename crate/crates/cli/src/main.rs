fn main() {
    std::process::exit(irho_cli::main_with_args(std::env::args_os()));
}

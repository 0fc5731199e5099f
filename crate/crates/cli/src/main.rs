fn main() {
    std::process::exit(sphens_cli::main_with_args(std::env::args_os()));
}

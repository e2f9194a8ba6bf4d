fn main() {
    std::process::exit(urlab::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(haarlab::cli::main_with_args(std::env::args_os()));
}

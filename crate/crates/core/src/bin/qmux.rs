fn main() {
    std::process::exit(qmux::cli::main_with_args(std::env::args_os()));
}

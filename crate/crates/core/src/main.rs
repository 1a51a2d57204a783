fn main() {
    std::process::exit(hardy_ns::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(qiso_core::cli::main_with_args(std::env::args_os()));
}

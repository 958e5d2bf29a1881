fn main() {
    std::process::exit(normbranch::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(bhdimer::cli::main_with_args(std::env::args_os()));
}

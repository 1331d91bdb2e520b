fn main() {
    std::process::exit(lyap3::cli::main_with_args(std::env::args_os()));
}

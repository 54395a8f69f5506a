fn main() {
    std::process::exit(probcert::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(normflow_cli::main_with(std::env::args_os()));
}

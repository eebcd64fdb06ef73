fn main() {
    let code = cursor_abandon::cli::main_with_args(std::env::args().collect());
    std::process::exit(code);
}

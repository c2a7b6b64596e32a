fn main() {
    std::process::exit(ctz::cli::main_with(std::env::args_os()));
}

fn main() {
    std::process::exit(sectorcoint_cli::run(std::env::args_os()));
}

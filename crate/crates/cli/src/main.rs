fn main() {
    std::process::exit(eigenshape_cli::run(std::env::args_os()));
}

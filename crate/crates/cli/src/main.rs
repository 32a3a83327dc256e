fn main() {
    std::process::exit(parsplit_cli::run(std::env::args_os()));
}

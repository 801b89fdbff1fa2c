fn main() {
    std::process::exit(ipursuit_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(armine_cli::run(std::env::args_os()));
}

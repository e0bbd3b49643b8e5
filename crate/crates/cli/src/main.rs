fn main() {
    std::process::exit(fbdomain_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(hexloop::cli::run(std::env::args_os()));
}

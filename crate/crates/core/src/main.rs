fn main() {
    std::process::exit(tamelab::cli::run(std::env::args_os()));
}

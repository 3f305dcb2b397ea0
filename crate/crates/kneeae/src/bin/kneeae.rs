fn main() {
    std::process::exit(kneeae::cli::run(std::env::args_os()));
}

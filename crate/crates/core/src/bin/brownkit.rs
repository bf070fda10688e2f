fn main() {
    std::process::exit(brownkit::cli::run(std::env::args_os()));
}

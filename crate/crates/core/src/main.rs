fn main() {
    std::process::exit(tailband::cli::run(std::env::args_os()));
}

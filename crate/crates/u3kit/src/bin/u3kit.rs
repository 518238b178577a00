fn main() {
    std::process::exit(u3kit::cli::run(std::env::args_os()));
}

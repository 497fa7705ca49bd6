fn main() {
    std::process::exit(gasketvar::cli::run(std::env::args_os()));
}

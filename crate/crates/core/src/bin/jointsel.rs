fn main() {
    std::process::exit(jointsel::cli::run(std::env::args_os()));
}

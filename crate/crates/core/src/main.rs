fn main() {
    std::process::exit(uforest::cli::run(std::env::args_os()));
}

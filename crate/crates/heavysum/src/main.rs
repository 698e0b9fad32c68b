fn main() {
    std::process::exit(heavysum::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(weighted_birkhoff::cli::run(std::env::args_os()));
}

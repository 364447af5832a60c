fn main() {
    std::process::exit(latstretch::cli::run(std::env::args_os()));
}

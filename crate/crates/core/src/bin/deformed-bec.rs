fn main() {
    std::process::exit(deformed_bec::cli::run(std::env::args_os()));
}

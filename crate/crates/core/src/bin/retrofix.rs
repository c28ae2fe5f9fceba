fn main() {
    std::process::exit(retrofix::cli::run(std::env::args_os()));
}

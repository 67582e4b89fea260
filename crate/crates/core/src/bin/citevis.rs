fn main() {
    std::process::exit(citevis::cli::run(std::env::args_os()));
}

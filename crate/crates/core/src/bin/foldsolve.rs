fn main() {
    std::process::exit(foldsolve::cli::run(std::env::args_os()));
}

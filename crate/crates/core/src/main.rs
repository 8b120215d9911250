fn main() {
    std::process::exit(rwlab::cli::run(std::env::args_os()));
}

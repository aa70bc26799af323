fn main() {
    std::process::exit(adlab::cli::run(std::env::args_os()));
}

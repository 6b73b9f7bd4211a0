fn main() {
    std::process::exit(hyperdof::cli::run(std::env::args_os()));
}

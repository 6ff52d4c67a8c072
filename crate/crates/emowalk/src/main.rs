fn main() {
    std::process::exit(emowalk::cli::run(std::env::args_os()));
}

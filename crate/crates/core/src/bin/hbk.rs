fn main() {
    std::process::exit(hbk::cli::run(std::env::args_os()));
}

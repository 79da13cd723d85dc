fn main() {
    std::process::exit(lrperc::cli::run_from(std::env::args_os()));
}

fn main() {
    std::process::exit(surftrap::cli::run(std::env::args_os()));
}

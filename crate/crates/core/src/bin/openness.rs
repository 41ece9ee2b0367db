fn main() {
    std::process::exit(openness::report::cli::run_cli(std::env::args_os()));
}

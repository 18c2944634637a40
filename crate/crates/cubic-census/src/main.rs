fn main() {
    std::process::exit(cubic_census::cli::main_with_args(std::env::args_os()));
}

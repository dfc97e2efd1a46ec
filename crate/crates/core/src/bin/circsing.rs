fn main() {
    std::process::exit(circle_singular::cli::main_from_args(std::env::args_os()));
}

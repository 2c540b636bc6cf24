fn main() {
    std::process::exit(weighted_inner::cli::main_with_args(std::env::args_os()));
}

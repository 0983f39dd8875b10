fn main() {
    std::process::exit(mlei::cli::main_with_args(std::env::args_os()));
}

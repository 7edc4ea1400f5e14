fn main() {
    std::process::exit(loopjordan::cli::main_with_args(std::env::args_os()));
}

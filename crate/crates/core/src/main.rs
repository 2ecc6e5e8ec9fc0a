fn main() {
    std::process::exit(cryospin::cli::main_with_args(std::env::args_os()));
}

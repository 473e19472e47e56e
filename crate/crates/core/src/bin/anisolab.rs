fn main() {
    std::process::exit(anisolab::cli::main_with_args(std::env::args_os()));
}

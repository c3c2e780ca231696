fn main() {
    std::process::exit(sdrelax::cli::main_with_args(std::env::args_os()));
}

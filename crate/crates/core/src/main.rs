fn main() {
    std::process::exit(trackjam::cli::main_with_args(std::env::args_os()));
}

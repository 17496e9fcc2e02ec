fn main() {
    std::process::exit(taylor_ego::cli::main_with_args(std::env::args_os()));
}

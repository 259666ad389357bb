fn main() {
    std::process::exit(seannet::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(sinkscale::cli::main_from_args(std::env::args_os()));
}

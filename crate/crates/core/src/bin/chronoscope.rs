fn main() {
    std::process::exit(chronoscope::cli::main_with_args(std::env::args_os()));
}

fn main() {
    std::process::exit(irs_hwi::cli::main_with_args(std::env::args_os()));
}

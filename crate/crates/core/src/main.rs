fn main() {
    std::process::exit(medcal::cli::main_with_args(std::env::args_os()));
}

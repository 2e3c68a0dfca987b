fn main() {
    std::process::exit(di_codes_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(covnet_cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(incompat::cli::cli_main(std::env::args_os()));
}

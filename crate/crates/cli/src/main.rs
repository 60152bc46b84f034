fn main() {
    std::process::exit(leadsto_cli::run(std::env::args_os()));
}

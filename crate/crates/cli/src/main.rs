fn main() {
    std::process::exit(impulse_mud_cli::run(std::env::args_os()));
}

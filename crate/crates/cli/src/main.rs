fn main() {
    std::process::exit(wentzell_cli::run(std::env::args_os()));
}

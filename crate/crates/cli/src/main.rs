fn main() {
    std::process::exit(subdyn_cli::run(std::env::args_os()));
}

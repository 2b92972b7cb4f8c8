fn main() {
    std::process::exit(fracvqa_cli::cli::run(std::env::args_os()));
}

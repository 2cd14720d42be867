fn main() {
    std::process::exit(mehler_traces::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(flowtrack::cli::run(std::env::args_os()));
}

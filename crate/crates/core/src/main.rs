fn main() {
    std::process::exit(logicbeam::cli::run(std::env::args_os()));
}

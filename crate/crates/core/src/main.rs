fn main() {
    std::process::exit(qmpst::cli::run(std::env::args_os()));
}

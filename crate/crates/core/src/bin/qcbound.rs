fn main() {
    std::process::exit(qcbound::cli::run(std::env::args_os()));
}

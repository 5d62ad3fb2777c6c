fn main() {
    std::process::exit(intentseq_cli::run(std::env::args_os()));
}

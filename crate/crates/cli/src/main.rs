fn main() {
    std::process::exit(hybridspin_cli::run(std::env::args_os()));
}

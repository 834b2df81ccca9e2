fn main() {
    std::process::exit(dqdcap::cli::run(std::env::args_os()));
}

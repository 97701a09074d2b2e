fn main() {
    std::process::exit(volswap::run(std::env::args_os()));
}

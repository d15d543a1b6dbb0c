fn main() {
    std::process::exit(crhyp::cli::run(std::env::args().skip(1)));
}

fn main() {
    std::process::exit(mixroute::cli::run(std::env::args_os()));
}

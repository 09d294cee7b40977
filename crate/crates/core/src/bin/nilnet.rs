fn main() {
    std::process::exit(nilnet::cli::dispatch(std::env::args_os()));
}

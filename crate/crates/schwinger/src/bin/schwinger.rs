fn main() {
    std::process::exit(schwinger::cli::dispatch(std::env::args_os()));
}

fn main() {
    std::process::exit(freqperm::cli::dispatch(std::env::args_os()));
}

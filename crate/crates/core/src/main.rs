fn main() {
    std::process::exit(rrg_cutoff::cli::run(std::env::args_os()));
}

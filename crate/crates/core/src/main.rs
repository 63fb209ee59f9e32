fn main() {
    std::process::exit(sprt_lattice::cli::run(std::env::args_os()));
}

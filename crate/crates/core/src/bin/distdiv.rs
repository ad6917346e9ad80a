fn main() {
    std::process::exit(distdiv::cli::run(std::env::args_os()));
}

fn main() {
    std::process::exit(hermite_gabor_cli::args::main_with(std::env::args_os()));
}

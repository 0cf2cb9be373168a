fn main() {
    std::process::exit(shearflow::cli::main_with(std::env::args_os()));
}

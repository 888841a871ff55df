fn main() {
    std::process::exit(janossy_cli::run(std::env::args_os()));
}

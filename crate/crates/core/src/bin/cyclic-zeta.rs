fn main() {
    env_logger::init();
    std::process::exit(cyclic_zeta::cli::main_with(std::env::args_os()));
}

fn main() {
    std::process::exit(lmg_vqe::cli::main_with_args(std::env::args_os()));
}

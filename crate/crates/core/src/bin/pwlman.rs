fn main() {
    std::process::exit(pwl_manifold::cli::main_with_args(std::env::args_os()));
}

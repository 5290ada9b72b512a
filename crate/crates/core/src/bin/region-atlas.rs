fn main() {
    std::process::exit(region_atlas::cli::main_with_args(std::env::args_os()));
}

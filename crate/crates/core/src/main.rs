fn main() {
    std::process::exit(dmdgp::cli::run(std::env::args_os()));
}

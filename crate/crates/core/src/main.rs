fn main() {
    std::process::exit(disentangle::cli::run_from(std::env::args_os()));
}

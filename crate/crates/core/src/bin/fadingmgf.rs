fn main() {
    std::process::exit(fadingmgf::cli::run(std::env::args_os()));
}

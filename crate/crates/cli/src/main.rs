fn main() {
    std::process::exit(besicovitch_cli::run(std::env::args_os()));
}

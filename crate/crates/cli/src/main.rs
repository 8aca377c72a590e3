fn main() {
    std::process::exit(wim_cli::commands::run(std::env::args_os()));
}

fn main() {
    std::process::exit(skillpick_cli::run(std::env::args_os()));
}

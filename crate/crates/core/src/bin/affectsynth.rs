fn main() {
    std::process::exit(affectsynth::cli::run(std::env::args_os()));
}

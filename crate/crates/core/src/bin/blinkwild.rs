fn main() -> std::process::ExitCode {
    blinkwild::cli::run()
}

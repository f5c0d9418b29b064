fn main() -> std::process::ExitCode {
    sensorpress::cli::run_from(std::env::args_os())
}

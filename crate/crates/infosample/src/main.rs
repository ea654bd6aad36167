fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(infosample::cli::run(std::env::args_os()) as u8)
}

fn main() -> std::process::ExitCode {
    grank::cli::main_with_args(std::env::args_os())
}

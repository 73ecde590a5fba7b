fn main() -> std::process::ExitCode {
    perclab::cli::main_with(std::env::args_os())
}

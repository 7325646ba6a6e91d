fn main() -> std::process::ExitCode {
    qbattery::cli::main()
}

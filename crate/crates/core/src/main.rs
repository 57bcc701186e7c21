fn main() -> std::process::ExitCode {
    adsb_tesla::cli::main()
}

fn main() -> std::process::ExitCode {
    homgraph::cli::main_exit()
}

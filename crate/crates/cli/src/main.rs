fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = chsh_cli::run(std::env::args_os(), std::env::var("CHSH_SEED").ok(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}

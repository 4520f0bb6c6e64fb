fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut err = std::io::stderr();
    let code = gls_core::cli::run(std::env::args_os(), &mut out, &mut err);
    std::process::exit(code);
}

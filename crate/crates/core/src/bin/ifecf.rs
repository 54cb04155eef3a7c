fn main() {
    ifecf::cli::init_threads();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = ifecf::cli::main_with_args(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}

fn main() {
    let code = qasmap_cli::run(std::env::args_os());
    std::process::exit(code);
}

use std::io;

fn main() {
    env_logger::init();
    let code = qudit_cren::cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}

use std::io::{self, IsTerminal};

fn main() {
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut input = stdin.lock();
    let mut out = io::stdout();
    let mut err = io::stderr();
    let code = taglr_cli::run_with_prompt(std::env::args_os(), &mut input, &mut out, &mut err, interactive);
    std::process::exit(code);
}

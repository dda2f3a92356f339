use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = naive_gw_cli::parse_and_run(std::env::args_os());
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    let _ = std::io::stdout().flush();
    ExitCode::from(outcome.status as u8)
}

use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (outcome, diagnostic) = cfent::run_from_args(std::env::args_os());
    print!("{}", outcome.stdout);
    if let Some(d) = diagnostic {
        eprint!("{d}");
    }
    let _ = std::io::stdout().flush();
    ExitCode::from(outcome.code as u8)
}

use std::process::ExitCode;

use clap::Parser;
use thresh_cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = thresh_cli::run(cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code)
}

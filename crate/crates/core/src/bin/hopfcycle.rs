use std::io::Write;

use anyhow::Context;

fn main() -> anyhow::Result<()> {
    let code = hopfcycle::cli::main_with_args(std::env::args_os());
    std::io::stdout().flush().context("flushing report")?;
    std::process::exit(code)
}

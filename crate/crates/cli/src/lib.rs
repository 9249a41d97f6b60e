//! Command-line front end for `chsh-core`.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod spec;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use args::{expand_config, Cli, Command};
use commands::Ctx;
use error::{exit, CliError};

/// Parses `argv` and runs one command, returning the process exit code.
pub fn run<I, T>(argv: I, env_seed: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => return report(stderr, e),
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    let mut ctx = Ctx { env_seed, stdout, stderr };
    let result = match &cli.command {
        Command::Eval(a) => commands::eval(&mut ctx, a),
        Command::Verify(a) => commands::verify(&mut ctx, a),
        Command::Optimize(a) => commands::optimize(&mut ctx, a),
        Command::Scan(a) => commands::scan(&mut ctx, a),
        Command::Star(a) => commands::star(&mut ctx, a),
        Command::Ellipse(a) => commands::ellipse(&mut ctx, a),
        Command::Uncertainty(a) => commands::uncertainty(&mut ctx, a),
    };
    match result {
        Ok(code) => code,
        Err(e) => report(ctx.stderr, e),
    }
}

fn report(stderr: &mut dyn Write, e: CliError) -> i32 {
    let _ = writeln!(stderr, "chsh: {e}");
    e.exit_code()
}

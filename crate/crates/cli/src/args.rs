//! Flags, and the `key=value` config file that backs them.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;
use crate::spec::{SettingsSpec, StateSpec};

#[derive(Debug, Parser)]
#[command(name = "chsh", version, about = "Tradeoff between the equivalent CHSH inequalities for two qubits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate ⟨I₀⟩…⟨I₃⟩ for one state and one set of settings.
    Eval(EvalArgs),
    /// Run the randomized verification corpus.
    Verify(VerifyArgs),
    /// Optimise one Bell operator for a state.
    Optimize(OptimizeArgs),
    /// Random-direction cloud in the ⟨I₀⟩⟨I₁⟩-plane.
    Scan(ScanArgs),
    /// Eight-pointed-star scan over isotropic states.
    Star(StarArgs),
    /// Trace the ellipse bound for one angle tuple.
    Ellipse(EllipseArgs),
    /// Variances of I₀, I₁ and the maximal ⟨I₀²⟩ + ⟨I₁²⟩.
    Uncertainty(UncertaintyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat key=value file; keys are flag names, flags given here win.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// RNG seed; defaults to CHSH_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for parallel scans.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ext {
    Max,
    Min,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct EvalArgs {
    #[arg(long, value_parser = parse_state)]
    pub state: StateSpec,
    /// Twelve numbers a1,a2,b1,b2; `random`; or `optimal:μ`.
    #[arg(long, value_parser = parse_settings, default_value = "optimal:0")]
    pub settings: SettingsSpec,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 100_000)]
    pub n: u64,
    #[command(flatten)]
    pub common: Common,
    /// Test hook: append a fabricated point `x,y` to the corpus.
    #[arg(long, hide = true, value_name = "X,Y")]
    pub inject_fake_point: Option<String>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct OptimizeArgs {
    #[arg(long, value_parser = parse_state)]
    pub state: StateSpec,
    #[arg(long, default_value_t = 0)]
    pub mu: usize,
    #[arg(long, value_enum, default_value = "max")]
    pub extremum: Ext,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct ScanArgs {
    #[arg(long, value_parser = parse_state)]
    pub state: StateSpec,
    #[arg(long, default_value_t = 50_000)]
    pub n: u64,
    #[command(flatten)]
    pub output: Output,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct StarArgs {
    /// Samples per quarter.
    #[arg(long, default_value_t = 50_000)]
    pub n: u64,
    #[arg(long, default_value_t = 0.0)]
    pub v_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub v_max: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta_min: f64,
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
    pub theta_max: f64,
    #[command(flatten)]
    pub output: Output,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct EllipseArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha_p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub delta_p: Option<f64>,
    /// Bob's half-angle; does not enter the bound.
    #[arg(long, default_value_t = std::f64::consts::FRAC_PI_4)]
    pub theta: f64,
    /// `random`: draw an admissible tuple from four random directions.
    #[arg(long)]
    pub tuple: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
#[command(args_override_self = true)]
pub struct UncertaintyArgs {
    #[arg(long, value_parser = parse_state)]
    pub state: StateSpec,
    #[arg(long, value_parser = parse_settings, default_value = "optimal:0")]
    pub settings: SettingsSpec,
    #[command(flatten)]
    pub common: Common,
}

fn parse_state(s: &str) -> Result<StateSpec, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

fn parse_settings(s: &str) -> Result<SettingsSpec, String> {
    s.parse().map_err(|e: CliError| e.to_string())
}

/// `key=value` lines; blank lines and `#` comments are skipped, `_` in keys
/// reads as `-`.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::config(format!("config line {}: expected key=value", k + 1)))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::config(format!("config line {}: bad key `{key}`", k + 1)));
        }
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}

fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    let mut found = None;
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(p));
        }
    }
    found
}

/// Splices the config file's entries in as flags ahead of the command-line
/// flags, so later flags override them.
pub fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = find_config(&args) else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let entries = parse_config(&text)?;
    let Some(pos) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')).map(|p| p + 2) else {
        return Ok(args);
    };
    let mut out: Vec<OsString> = args[..pos].to_vec();
    out.extend(entries.into_iter().map(|(k, v)| OsString::from(format!("--{k}={v}"))));
    out.extend_from_slice(&args[pos..]);
    Ok(out)
}

//! Command-line front end: argument parsing, dispatch and report rendering.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::coeff::format_rational;
use crate::form_lie::{identity_specialization, total_pairing, verify_selfdual_equivalence, Direction};
use crate::hochschild::{
    boundary, build_cv, displayed_residual, generic_residual, hh0_commutator_check, pairing_symbolic, verify_cycle,
    CycleMode,
};
use crate::matrix::QMatrix;
use crate::numeric::{numeric_zero_check, NumericOptions, PointKind, DEFAULT_SAMPLES, DEFAULT_TOL};
use crate::report::{Status, VerificationReport};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "hopfcycle",
    version,
    about = "Verify the 3-cycle c_V and its pairing with Casimir cocycles"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check b_3 c_V = 0 symbolically.
    VerifyCycle(CycleArgs),
    /// Replay the equivalence of colinearity and the antipode formula.
    Selfdual,
    /// Pair c_V with the cup of three derivations read from files.
    Pair(PairArgs),
    /// Sum the pairing over a bracket decomposition of the Casimir.
    CasimirPairing(FormArgs),
    /// Check that the counit vanishes on commutators.
    Hh0(Hh0Args),
    /// Evaluate a chain at sampled representation points.
    NumericCheck(NumericArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyCycle(_) => "verify-cycle",
            Command::Selfdual => "selfdual",
            Command::Pair(_) => "pair",
            Command::CasimirPairing(_) => "casimir-pairing",
            Command::Hh0(_) => "hh0",
            Command::NumericCheck(_) => "numeric-check",
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Epsilon {
    #[value(name = "+1", alias = "1")]
    #[serde(rename = "+1")]
    Plus,
    #[value(name = "-1")]
    #[serde(rename = "-1")]
    Minus,
    #[value(name = "generic")]
    #[serde(rename = "generic")]
    Generic,
    /// No symmetry of E assumed.
    #[value(name = "none")]
    #[serde(rename = "none")]
    None,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CycleArgs {
    #[arg(long, value_enum, default_value = "generic", allow_hyphen_values = true)]
    pub epsilon: Epsilon,
    /// Ignored: the check is symbolic in N.
    #[arg(long = "N", default_value = "generic")]
    #[serde(rename = "N")]
    pub n: String,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FormArgs {
    /// `identity`, `symplectic` or a path to a JSON matrix.
    #[arg(long = "E", default_value = "identity")]
    #[serde(rename = "E")]
    pub e: String,
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PairArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub form: FormArgs,
    #[arg(long = "F1")]
    #[serde(rename = "F1")]
    pub f1: PathBuf,
    #[arg(long = "F2")]
    #[serde(rename = "F2")]
    pub f2: PathBuf,
    #[arg(long = "F3")]
    #[serde(rename = "F3")]
    pub f3: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Hh0Args {
    #[arg(long = "N", default_value_t = 3)]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    /// b_3 c_V under contraction only.
    BoundaryCv,
    /// b_3 c_V with the antipode substituted.
    GenericResidual,
    /// The residual modulo chains with a unit past the first tensor slot.
    DisplayedResidual,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Points {
    Auto,
    Classical,
    Cyclic,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Zero,
    Nonzero,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct NumericArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub form: FormArgs,
    #[arg(long, value_enum, default_value = "boundary-cv")]
    pub target: Target,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "auto")]
    pub points: Points,
    #[arg(long, value_enum, default_value = "zero")]
    pub expect: Expect,
}

/// A full run: the parsed command and the chosen output format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub format: Format,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        RunConfig {
            command: cli.command,
            format: cli.format,
        }
    }
}

/// The machine-readable output of a run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunDocument {
    pub tool_version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub checks: Vec<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

pub struct Outcome {
    pub exit_code: i32,
    pub document: RunDocument,
}

fn load_form(args: &FormArgs) -> Result<QMatrix, Error> {
    let e = match args.e.as_str() {
        "identity" => QMatrix::identity(args.n.ok_or_else(|| Error::InvalidInput("--N is required".into()))?),
        "symplectic" => QMatrix::symplectic(args.n.ok_or_else(|| Error::InvalidInput("--N is required".into()))?)?,
        path => read_matrix(&PathBuf::from(path))?,
    };
    if e.rows() == 0 || !e.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "E must be a non-empty square matrix, got {}x{}",
            e.rows(),
            e.cols()
        )));
    }
    if let Some(n) = args.n {
        if n != e.rows() {
            return Err(Error::DimensionMismatch(format!(
                "--N {n} but E is {}x{}",
                e.rows(),
                e.cols()
            )));
        }
    }
    if e.inverse().is_none() {
        return Err(Error::SingularForm);
    }
    Ok(e)
}

fn read_matrix(path: &PathBuf) -> Result<QMatrix, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| Error::InvalidInput(format!("cannot read {}: {err}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|err| Error::Parse(format!("{}: {err}", path.display())))?;
    QMatrix::from_json(&value)
}

fn failure(check: &str, mode: String, err: &Error) -> VerificationReport {
    VerificationReport::new(check, mode, Status::Failed, false).note(err.to_string())
}

fn dispatch(cmd: &Command) -> Result<Vec<VerificationReport>, Error> {
    match cmd {
        Command::VerifyCycle(a) => {
            if a.n != "generic" && a.n.parse::<u32>().map_or(true, |n| n == 0) {
                return Err(Error::InvalidInput(format!(
                    "--N must be a positive integer or generic, got {}",
                    a.n
                )));
            }
            let mode = match a.epsilon {
                Epsilon::Plus => CycleMode::Sign(1),
                Epsilon::Minus => CycleMode::Sign(-1),
                Epsilon::Generic => CycleMode::GenericSign,
                Epsilon::None => CycleMode::GenericForm,
            };
            Ok(vec![verify_cycle(mode)?])
        }
        Command::Selfdual => Ok(vec![
            verify_selfdual_equivalence(Direction::Forward)?,
            verify_selfdual_equivalence(Direction::Backward)?,
            identity_specialization()?,
        ]),
        Command::Pair(a) => {
            let e = load_form(&a.form)?;
            let fs = [read_matrix(&a.f1)?, read_matrix(&a.f2)?, read_matrix(&a.f3)?];
            let start = Instant::now();
            let mode = format!("N={}", e.rows());
            let value = match pairing_symbolic([&fs[0], &fs[1], &fs[2]], &e) {
                Ok(v) => v,
                Err(err @ Error::IncompatibleDerivation { .. }) => return Ok(vec![failure("pair", mode, &err)]),
                Err(err) => return Err(err),
            };
            let oracle: BigRational = -(&(&fs[0] * &fs[1]) * &fs[2]).trace();
            let ok = value == oracle;
            Ok(vec![VerificationReport::new(
                "pair",
                mode,
                if ok { Status::Passed } else { Status::Failed },
                ok,
            )
            .value(format_rational(&value))
            .note(format!("-tr(F1 F2 F3) = {}", format_rational(&oracle)))
            .timed(start)])
        }
        Command::CasimirPairing(a) => {
            let e = load_form(a)?;
            match total_pairing(&e) {
                Ok((_, report)) => Ok(vec![report]),
                Err(err @ (Error::NotSemisimple | Error::DegenerateTraceForm)) => {
                    Ok(vec![failure("casimir-pairing", format!("N={}", e.rows()), &err)])
                }
                Err(err) => Err(err),
            }
        }
        Command::Hh0(a) => {
            if a.n == 0 {
                return Err(Error::InvalidInput("--N must be positive".into()));
            }
            Ok(vec![hh0_commutator_check(a.samples, a.n, a.seed)?])
        }
        Command::NumericCheck(a) => {
            let e = load_form(&a.form)?;
            #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
            if !(a.tol > 0.0) {
                return Err(Error::InvalidInput("--tol must be positive".into()));
            }
            let chain = match a.target {
                Target::BoundaryCv => boundary(&build_cv())?,
                Target::GenericResidual => generic_residual()?.full,
                Target::DisplayedResidual => displayed_residual(),
            };
            let opts = NumericOptions {
                samples: a.samples,
                tol: a.tol,
                seed: a.seed,
                points: match a.points {
                    Points::Auto => PointKind::Auto,
                    Points::Classical => PointKind::Classical,
                    Points::Cyclic => PointKind::Cyclic,
                },
                derivations: None,
                expect_zero: a.expect == Expect::Zero,
            };
            Ok(vec![numeric_zero_check(&chain, &e, &opts)?])
        }
    }
}

/// The command's own arguments plus the output format, as a flat object.
fn config_value(config: &RunConfig) -> serde_json::Value {
    let mut args = match serde_json::to_value(&config.command) {
        Ok(serde_json::Value::Object(tagged)) => tagged.into_iter().next().map(|(_, v)| v).unwrap_or_default(),
        _ => serde_json::Value::Null,
    };
    if !args.is_object() {
        args = serde_json::json!({});
    }
    args["format"] = serde_json::to_value(config.format).unwrap_or_default();
    args
}

/// Runs a configuration; input problems map to exit code 2, failed checks to 1.
pub fn run(config: &RunConfig) -> Outcome {
    let mut document = RunDocument {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: config.command.name().to_string(),
        config: config_value(config),
        checks: Vec::new(),
        error: None,
    };
    let exit_code = match dispatch(&config.command) {
        Ok(checks) => {
            let ok = checks.iter().all(|c| c.passed);
            document.checks = checks;
            if ok {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(err) => {
            document.error = Some(err.to_string());
            EXIT_USAGE
        }
    };
    Outcome { exit_code, document }
}

fn status_name(s: Status) -> String {
    serde_json::to_value(s)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

pub fn render(doc: &RunDocument, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(doc).expect("report serializes"),
        Format::Text => {
            let mut out = String::new();
            if let Some(err) = &doc.error {
                let _ = writeln!(out, "error: {err}");
            }
            for c in &doc.checks {
                let _ = write!(
                    out,
                    "[{}] {} ({}): {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.check,
                    c.mode,
                    status_name(c.status)
                );
                if let Some(v) = &c.value {
                    let _ = write!(out, "  value = {v}");
                }
                let _ = writeln!(out, "  [{:.1} ms]", c.runtime_ms);
                for n in &c.notes {
                    let _ = writeln!(out, "    {n}");
                }
                for w in &c.witnesses {
                    let _ = writeln!(
                        out,
                        "    witness: sample {} |value| = {:e} ({})",
                        w.sample, w.value, w.detail
                    );
                }
                if let Some(r) = &c.residual_form {
                    let _ = writeln!(out, "    residual:");
                    for line in r.lines() {
                        let _ = writeln!(out, "      {line}");
                    }
                }
            }
            out
        }
    }
}

/// Parses arguments, runs, prints and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = err.print();
            return code;
        }
    };
    let config = RunConfig::from(cli);
    let outcome = run(&config);
    let text = render(&outcome.document, config.format);
    if outcome.exit_code == EXIT_USAGE && config.format == Format::Text {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    outcome.exit_code
}

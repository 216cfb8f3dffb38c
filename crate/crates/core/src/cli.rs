//! Command-line front end.
//!
//! Volumes on the command line are weighted volumes `V± = ρ±·|Ω±|`, not
//! Lebesgue volumes.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::classifier::{classify, ClassificationRecord};
use crate::error::{domain, Error, Result};
use crate::geometry::{cross_section, ProblemParams};
use crate::io::{cross_section_csv, cross_section_svg, fmt_f64, to_json, write_csv};
use crate::oracle::{compare, draw_params};
use crate::solver::gamma_star;

/// Exit status for argument and domain errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when `verify` finds a failing draw.
pub const EXIT_VERIFY_FAILED: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "dido", version, about = "Two-phase weighted isoperimetric minimizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify one instance and print the minimizer as JSON.
    Solve(SolveArgs),
    /// Print the threshold interface cost as JSON.
    GammaStar(ProblemArgs),
    /// Tabulate the minimizer over a range of one parameter.
    Sweep(SweepArgs),
    /// Check the classifier against the brute-force oracle on random draws.
    Verify(VerifyArgs),
    /// Write the minimizer's cross-section.
    ExportGeometry(GeometryArgs),
}

#[derive(Debug, Args)]
struct ProblemArgs {
    /// Space dimension N.
    #[arg(long)]
    dim: Option<u32>,
    /// Densities ρ− ρ+.
    #[arg(long, num_args = 2, value_names = ["RHO_MINUS", "RHO_PLUS"], allow_negative_numbers = true)]
    rho: Option<Vec<f64>>,
    /// Weighted volumes V− V+.
    #[arg(long, num_args = 2, value_names = ["V_MINUS", "V_PLUS"], allow_negative_numbers = true)]
    vol: Option<Vec<f64>>,
    /// Interface cost γ.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    /// Read parameters from JSON: either bare parameters or a `solve` record.
    /// Explicit flags override the file.
    #[arg(long, visible_alias = "config", value_name = "PATH")]
    from_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Varying {
    Gamma,
    RhoRatio,
    VolumeRatio,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum)]
    vary: Varying,
    /// lo hi steps
    #[arg(long, num_args = 3, value_names = ["LO", "HI", "STEPS"], allow_negative_numbers = true)]
    range: Vec<f64>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    draws: usize,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Args)]
struct GeometryArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = Format::Svg)]
    format: Format,
    /// Segments per cap arc.
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

impl ProblemArgs {
    fn params(&self) -> Result<ProblemParams> {
        let base = match &self.from_json {
            Some(path) => Some(read_params(path)?),
            None => None,
        };
        let pick = |flag: Option<f64>, file: Option<f64>, name: &str| {
            flag.or(file).ok_or_else(|| Error::Domain(format!("missing --{name}")))
        };
        let dim = self.dim.or(base.map(|b| b.dim)).ok_or_else(|| Error::Domain("missing --dim".into()))?;
        let rho = self.rho.as_deref();
        let vol = self.vol.as_deref();
        let p = ProblemParams {
            dim,
            rho_minus: pick(rho.map(|r| r[0]), base.map(|b| b.rho_minus), "rho")?,
            rho_plus: pick(rho.map(|r| r[1]), base.map(|b| b.rho_plus), "rho")?,
            v_minus: pick(vol.map(|v| v[0]), base.map(|b| b.v_minus), "vol")?,
            v_plus: pick(vol.map(|v| v[1]), base.map(|b| b.v_plus), "vol")?,
            gamma: self.gamma.or(base.map(|b| b.gamma)).unwrap_or(0.0),
        };
        p.validate()?;
        Ok(p)
    }
}

fn read_params(path: &PathBuf) -> Result<ProblemParams> {
    let text = fs::read_to_string(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))?;
    let params = value.get("params").cloned().unwrap_or(value);
    serde_json::from_value(params).map_err(|e| Error::Domain(format!("{}: {e}", path.display())))
}

/// A one-parameter sweep over a template instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub varying: Varying,
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
    pub fixed: ProblemParams,
    pub output_path: Option<PathBuf>,
}

impl SweepSpec {
    /// Validates the range; `γ` sweeps are clipped to `γ ≥ 0`.
    pub fn new(
        varying: Varying,
        lo: f64,
        hi: f64,
        steps: usize,
        fixed: ProblemParams,
        output_path: Option<PathBuf>,
    ) -> Result<Self> {
        if steps < 2 {
            return domain(format!("sweep needs at least 2 steps, got {steps}"));
        }
        if !(lo < hi) {
            return domain(format!("sweep range needs lo < hi, got {lo} and {hi}"));
        }
        let lo = match varying {
            Varying::Gamma => lo.max(0.0),
            Varying::RhoRatio | Varying::VolumeRatio if lo <= 0.0 => {
                return domain(format!("ratio sweeps need lo > 0, got {lo}"));
            }
            _ => lo,
        };
        if !(lo < hi) {
            return domain(format!("sweep range is empty after clipping to gamma >= 0 (hi = {hi})"));
        }
        fixed.validate()?;
        Ok(SweepSpec { varying, lo, hi, steps, fixed, output_path })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.hi } else { self.lo + (self.hi - self.lo) * i as f64 / last })
            .collect()
    }

    /// The instance at swept value `v`: `γ = v`, `ρ− = v·ρ+` or `V− = v·V+`.
    pub fn instance(&self, v: f64) -> ProblemParams {
        let mut p = self.fixed;
        match self.varying {
            Varying::Gamma => p.gamma = v,
            Varying::RhoRatio => p.rho_minus = v * p.rho_plus,
            Varying::VolumeRatio => p.v_minus = v * p.v_plus,
        }
        p
    }
}

pub const SWEEP_HEADER: [&str; 9] =
    ["swept_value", "gamma_star", "regime", "alpha", "beta", "R_minus", "R_plus", "F_total", "F_interface"];

/// Rows of the sweep table, computed in parallel and returned in order.
pub fn sweep_rows(sweep: &SweepSpec) -> Result<Vec<Vec<String>>> {
    sweep.values()
        .par_iter()
        .map(|&v| {
            let r = classify(&sweep.instance(v))?;
            let c = r.minimizer;
            let regime = if c.kind.is_type_i() { "I" } else { "II" };
            Ok(vec![
                fmt_f64(v),
                fmt_f64(r.threshold.gamma_star),
                regime.to_string(),
                fmt_f64(c.alpha),
                fmt_f64(c.beta),
                fmt_f64(c.r_minus),
                fmt_f64(c.r_plus),
                fmt_f64(r.cost.total),
                fmt_f64(r.cost.interface),
            ])
        })
        .collect()
}

fn emit(bytes: &[u8], path: Option<&PathBuf>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, bytes)?,
        None => out.write_all(bytes)?,
    }
    Ok(())
}

fn json_line<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut s = to_json(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

enum Outcome {
    Done,
    VerifyFailed,
}

fn run(cmd: Command, out: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::Solve(a) => {
            let record: ClassificationRecord = classify(&a.problem.params()?)?.to_record();
            emit(&json_line(&record)?, a.out.as_ref(), out)?;
        }
        Command::GammaStar(a) => {
            emit(&json_line(&gamma_star(&a.params()?)?)?, None, out)?;
        }
        Command::Sweep(a) => {
            let steps = a.range[2];
            if !(steps >= 2.0 && steps.fract() == 0.0) {
                return domain(format!("sweep steps must be an integer >= 2, got {steps}"));
            }
            let sweep = SweepSpec::new(a.vary, a.range[0], a.range[1], steps as usize, a.problem.params()?, a.out)?;
            let rows = sweep_rows(&sweep)?;
            let mut buf = Vec::new();
            write_csv(&mut buf, &SWEEP_HEADER, &rows)?;
            emit(&buf, sweep.output_path.as_ref(), out)?;
        }
        Command::Verify(a) => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let draws: Vec<ProblemParams> = (0..a.draws).map(|_| draw_params(&mut rng)).collect();
            let reports = draws.par_iter().map(compare).collect::<Result<Vec<_>>>()?;
            emit(&json_line(&reports)?, a.out.as_ref(), out)?;
            if reports.iter().any(|r| !r.passed) {
                return Ok(Outcome::VerifyFailed);
            }
        }
        Command::ExportGeometry(a) => {
            let r = classify(&a.problem.params()?)?;
            let cs = cross_section(&r.minimizer, a.resolution)?;
            let bytes = match a.format {
                Format::Svg => cross_section_svg(&cs).into_bytes(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    cross_section_csv(&mut buf, &cs)?;
                    buf
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Section<'a> {
                        left: &'a [crate::geometry::ProfilePoint],
                        right: &'a [crate::geometry::ProfilePoint],
                        interface: crate::geometry::InterfaceSegment,
                    }
                    json_line(&Section { left: &cs.left, right: &cs.right, interface: cs.interface })?
                }
            };
            emit(&bytes, a.out.as_ref(), out)?;
        }
    }
    Ok(Outcome::Done)
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// exit status.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    match run(cli.command, out) {
        Ok(Outcome::Done) => 0,
        Ok(Outcome::VerifyFailed) => {
            let _ = writeln!(err, "verification failed");
            EXIT_VERIFY_FAILED
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

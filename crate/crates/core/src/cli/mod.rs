//! The `cren` command line: `verify`, `sweep` and `cren`.
//!
//! Exit codes are 0 on success, 1 when a check fails and 2 for usage or
//! input errors.

mod state_file;
mod sweep;
mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::measures::{convex_roof_upper_bound, negativity, BipartiteCut, ConvexRoofOptions};
use crate::qudit::QuditDim;
use crate::red::{Mode, SLOW_DENSE_MAX_D};
use crate::tensor::{hermitian_eigenvalues, PSD_TOL};

pub use state_file::{ParseError, StateFile};
pub use sweep::{format_sig, sweep_csv, CSV_HEADER};
pub use verify::{run_checks, CheckResult};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Largest local dimension any subcommand accepts.
pub const MAX_D: usize = 8;

#[derive(Debug, Parser)]
#[command(
    name = "cren",
    version,
    about = "Qudit entanglement distribution and dynamics checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the property suite and report PASS/FAIL per check.
    Verify(SweepArgs),
    /// Write the distribution bound over a fidelity grid as CSV.
    Sweep(SweepArgs),
    /// Evaluate the entanglement of a state file.
    Cren(CrenArgs),
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated local dimensions.
    #[arg(long = "d", value_delimiter = ',', default_value = "2,3,4")]
    d: Vec<usize>,
    /// Points per fidelity axis, endpoints included.
    #[arg(long, default_value_t = 11)]
    grid: usize,
    /// Largest accepted deviation; sweep rows fail below `-tol`.
    #[arg(long, default_value = "1e-9")]
    tol: f64,
    /// Allow dense four-qudit simulation up to d = 6.
    #[arg(long)]
    slow: bool,
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Negativity,
    ConvexRoof,
}

#[derive(Debug, Args)]
struct CrenArgs {
    /// State file: `dims dA dB`, then one row of `re,im` pairs per line.
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Negativity)]
    method: Method,
    /// Random starting points for the convex-roof search.
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Validated settings shared by `verify` and `sweep`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub dims: Vec<QuditDim>,
    pub grid: usize,
    pub tol: f64,
    pub mode: Mode,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl SweepConfig {
    fn from_args(args: SweepArgs, dense_everywhere: bool) -> Result<Self, String> {
        if args.grid < 2 {
            return Err(format!("--grid must be at least 2, got {}", args.grid));
        }
        if !(args.tol > 0.0 && args.tol.is_finite()) {
            return Err(format!("--tol must be positive, got {}", args.tol));
        }
        if args.d.is_empty() {
            return Err("--d needs at least one dimension".into());
        }
        let mode = if args.slow { Mode::Slow } else { Mode::Fast };
        let mut dims = Vec::with_capacity(args.d.len());
        for &d in &args.d {
            let q = QuditDim::new(d).map_err(|e| format!("--d: {e}"))?;
            if d > MAX_D {
                return Err(format!("--d {d} exceeds the supported maximum {MAX_D}"));
            }
            let needs_dense = dense_everywhere || args.slow;
            if needs_dense && !mode.runs_dense(q) {
                return Err(if args.slow || d > SLOW_DENSE_MAX_D {
                    format!("--d {d} is beyond the dense simulation limit d <= {SLOW_DENSE_MAX_D}")
                } else {
                    format!(
                        "--d {d} needs the dense four-qudit simulation beyond d = {}; rerun with --slow",
                        mode.dense_max_d()
                    )
                });
            }
            dims.push(q);
        }
        Ok(Self {
            dims,
            grid: args.grid,
            tol: args.tol,
            mode,
            seed: args.seed,
            out: args.out,
        })
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    match cli.command {
        Command::Verify(args) => match SweepConfig::from_args(args, true) {
            Ok(config) => cmd_verify(&config, out),
            Err(msg) => usage(err, &msg),
        },
        Command::Sweep(args) => match SweepConfig::from_args(args, false) {
            Ok(config) => cmd_sweep(&config, out, err),
            Err(msg) => usage(err, &msg),
        },
        Command::Cren(args) => cmd_cren(&args, out, err),
    }
}

fn usage(err: &mut dyn Write, msg: &str) -> i32 {
    let _ = writeln!(err, "error: {msg}");
    EXIT_USAGE
}

pub fn cmd_verify(config: &SweepConfig, out: &mut dyn Write) -> i32 {
    let results = run_checks(config);
    let mut failed = 0;
    for r in &results {
        let _ = writeln!(out, "{r}");
        if !r.passed {
            failed += 1;
        }
    }
    let _ = writeln!(
        out,
        "{} of {} checks passed (tol {:e})",
        results.len() - failed,
        results.len(),
        config.tol
    );
    if failed == 0 {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

pub fn cmd_sweep(config: &SweepConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (csv, violations) = match sweep_csv(config) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    match &config.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &csv) {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
        }
        None => {
            let _ = out.write_all(csv.as_bytes());
        }
    }
    if violations > 0 {
        let _ = writeln!(
            err,
            "error: {violations} rows have gap below -{:e}",
            config.tol
        );
        return EXIT_CHECK_FAILED;
    }
    EXIT_OK
}

fn cmd_cren(args: &CrenArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match std::fs::read_to_string(&args.path) {
        Ok(t) => t,
        Err(e) => return usage(err, &format!("cannot read {}: {e}", args.path.display())),
    };
    let file = match StateFile::parse(&text) {
        Ok(f) => f,
        Err(e) => return usage(err, &format!("{}: {e}", args.path.display())),
    };
    if let Err(msg) = file.check_density() {
        return usage(err, &format!("{}: {msg}", args.path.display()));
    }
    let rho = (&file.matrix + file.matrix.adjoint()).unscale(2.0);
    match hermitian_eigenvalues(&rho) {
        Ok(values) => {
            let min = values.last().copied().unwrap_or(0.0);
            if min < -PSD_TOL {
                return usage(
                    err,
                    &format!(
                        "{}: not positive semidefinite (eigenvalue {min:e})",
                        args.path.display()
                    ),
                );
            }
        }
        Err(e) => return usage(err, &e.to_string()),
    }
    let dims = file.shape.dims();
    let cut = match BipartiteCut::new(dims[0], dims[1]) {
        Ok(c) => c,
        Err(e) => return usage(err, &e.to_string()),
    };
    match args.method {
        Method::Negativity => match negativity(&rho, cut) {
            Ok(v) => {
                let _ = writeln!(out, "negativity = {}", format_sig(v));
                EXIT_OK
            }
            Err(e) => usage(err, &e.to_string()),
        },
        Method::ConvexRoof => {
            let options = ConvexRoofOptions {
                restarts: args.restarts,
                seed: args.seed,
                ..ConvexRoofOptions::default()
            };
            match convex_roof_upper_bound(&rho, cut, &options) {
                Ok(res) => {
                    let _ = writeln!(out, "convex-roof = {} (upper bound)", format_sig(res.value));
                    let _ = writeln!(out, "ensemble size = {}", res.ensemble_size);
                    let _ = writeln!(out, "rank = {}", res.rank);
                    let _ = writeln!(out, "restarts = {}", res.restarts);
                    if res.budget_exhausted {
                        let _ =
                            writeln!(out, "note: iteration budget exhausted on the best restart");
                    }
                    EXIT_OK
                }
                Err(e) => usage(err, &e.to_string()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(args.iter().copied(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn config_rules() {
        let (code, _, err) = run_str(&["cren", "verify", "--d", "6"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--slow"), "{err}");
        let (code, _, err) = run_str(&["cren", "verify", "--d", "7", "--slow"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("limit"), "{err}");
        assert_eq!(run_str(&["cren", "sweep", "--grid", "1"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["cren", "sweep", "--tol", "0"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["cren", "sweep", "--d", "1"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["cren", "sweep", "--d", "9"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["cren", "bogus"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["cren", "--help"]).0, EXIT_OK);
    }

    #[test]
    fn sweep_accepts_large_d_in_fast_mode() {
        let (code, out, _) = run_str(&["cren", "sweep", "--d", "8", "--grid", "3"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with(CSV_HEADER));
        assert_eq!(
            run_str(&["cren", "sweep", "--d", "8", "--slow"]).0,
            EXIT_USAGE
        );
    }

    #[test]
    fn sweep_to_unwritable_path() {
        let (code, _, err) = run_str(&[
            "cren",
            "sweep",
            "--d",
            "2",
            "--out",
            "/nonexistent-dir/x.csv",
        ]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("cannot write"));
    }
}

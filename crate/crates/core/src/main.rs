//! `qlattice` command line: constants, transforms, fractional derivatives
//! and the verification suites.
//!
//! Exit codes: 0 success, 1 a verification check failed, 2 usage or domain
//! error, 3 malformed input, 4 numeric coverage (grid or range exhausted).

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use qlattice::fourier::{fourier_forward, fourier_inverse, TransformPlan};
use qlattice::fracdiff::frac_apply;
use qlattice::lattice::{read_csv, write_csv, LatticeFunction, LatticeGrid, Sign};
use qlattice::qcore::{a_nu, c_nu, gamma_q2, theta0, QParams, C64};
use qlattice::verify::{run_suite, significant_relative_error, Sample, Suite, SuiteConfig};
use qlattice::{QError, QResult};

#[derive(Parser)]
#[command(name = "qlattice", version, about = "q²-analysis on the lattice {±q^{2m}}")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Global {
    /// Index window mmin:mmax for sampled and output grids.
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = parse_grid)]
    grid: Option<(i64, i64)>,
    /// Truncation tolerance of every series.
    #[arg(long, global = true, default_value_t = 1e-14)]
    tol: f64,
    /// Cap on the number of series terms.
    #[arg(long, global = true, default_value_t = 512)]
    terms: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print Θ₀ and, with --nu, Γ_{q²}(ν), c_ν and A_ν as JSON.
    Constants {
        #[arg(long)]
        q: f64,
        #[arg(long, allow_hyphen_values = true)]
        nu: Option<f64>,
    },
    /// Forward or inverse transform of a CSV lattice function or a sample.
    Transform {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = Direction::Fwd)]
        direction: Direction,
        /// Also apply the opposite transform and report the relative error on stderr.
        #[arg(long)]
        roundtrip: bool,
    },
    /// Run verification suites and write a JSON report array.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
        /// Comma-separated values of q.
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        q: Vec<f64>,
        /// Seed for the randomized Vandermonde draws.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the normal form of an operator expression instead of running suites.
        #[arg(long)]
        expr: Option<String>,
    },
    /// Fractional derivative (ν < 0) or primitive (ν > 0) of positive-branch data.
    Fracderiv {
        #[command(flatten)]
        input: InputArgs,
        /// Order; −1 is the difference quotient, 1 the Jackson primitive.
        #[arg(long, allow_hyphen_values = true)]
        nu: f64,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long, default_value_t = 0.5)]
    q: f64,
    /// CSV file with header sign,m,re,im; `-` reads stdin.
    #[arg(long, conflicts_with = "sample", required_unless_present = "sample")]
    input: Option<PathBuf>,
    /// Built-in sample: gaussian, indicator:m or poly:n.
    #[arg(long)]
    sample: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Fwd,
    Inv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    All,
    Symbolic,
    Fourier,
    Conv,
    Frac,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::All => Suite::All,
            SuiteArg::Symbolic => Suite::Symbolic,
            SuiteArg::Fourier => Suite::Fourier,
            SuiteArg::Conv => Suite::Conv,
            SuiteArg::Frac => Suite::Frac,
        }
    }
}

/// Sampled inputs without --grid use this window.
const DEFAULT_SAMPLE_GRID: (i64, i64) = (-24, 40);

fn parse_grid(s: &str) -> Result<(i64, i64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected mmin:mmax, got '{s}'"))?;
    let lo = a.trim().parse::<i64>().map_err(|e| format!("bad mmin '{a}': {e}"))?;
    let hi = b.trim().parse::<i64>().map_err(|e| format!("bad mmax '{b}': {e}"))?;
    if lo > hi {
        return Err(format!("mmin {lo} exceeds mmax {hi}"));
    }
    Ok((lo, hi))
}

enum Failure {
    Q(QError),
    Usage(String),
    Checks,
}

impl From<QError> for Failure {
    fn from(e: QError) -> Self {
        Failure::Q(e)
    }
}

fn exit_code(e: &QError) -> u8 {
    match e {
        QError::Format(_) => 3,
        QError::Coverage(_) | QError::Size(_) | QError::Range { .. } | QError::NoLimit(_) | QError::Convergence(_) => 4,
        QError::Domain(_) | QError::Pole(_) | QError::Degenerate(_) | QError::Table(_) | QError::Parse(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Q(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let g = &cli.global;
    let params = |q: f64| -> QResult<QParams> {
        let d = QParams::new(0.5)?;
        QParams::with_policy(q, g.tol, g.terms, d.sum_halfwidth)
    };
    match cli.cmd {
        Cmd::Constants { q, nu } => {
            let p = params(q)?;
            let mut out = json!({
                "q": q,
                "theta0": theta0(&p)?,
                "series_tol": p.series_tol,
                "max_terms": p.max_terms,
                "sum_halfwidth": p.sum_halfwidth,
            });
            if let Some(nu) = nu {
                let gamma = gamma_q2(C64::new(nu, 0.0), &p)?;
                out["nu"] = json!(nu);
                out["gamma"] = json!(gamma.re);
                // c_ν and A_ν exist only for 0 < ν < 1
                let (c, a) = if nu > 0.0 && nu < 1.0 {
                    let (c, a) = (c_nu(nu, &p)?, a_nu(nu, &p)?);
                    (json!([c.re, c.im]), json!([a.re, a.im]))
                } else {
                    (json!(null), json!(null))
                };
                out["c_nu"] = c;
                out["a_nu"] = a;
            }
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
            Ok(())
        }
        Cmd::Transform { input, direction, roundtrip } => {
            let p = params(input.q)?;
            let f = load(&input, &p, g.grid)?;
            let plan = match g.grid {
                Some((lo, hi)) => TransformPlan::new(f.grid, LatticeGrid::new(p, lo, hi)?)?,
                None => TransformPlan::square(f.grid),
            };
            let out = match direction {
                Direction::Fwd => fourier_forward(&f, &plan)?,
                Direction::Inv => fourier_inverse(&f, &TransformPlan::new(plan.s_grid, plan.z_grid)?)?,
            };
            if roundtrip {
                let back = match direction {
                    Direction::Fwd => fourier_inverse(&out, &plan)?,
                    Direction::Inv => fourier_forward(&out, &TransformPlan::new(plan.s_grid, plan.z_grid)?)?,
                };
                let r = significant_relative_error(&f, &back);
                eprintln!("{}", json!({ "roundtrip_residual": r }));
            }
            save(&input, &out)
        }
        Cmd::Fracderiv { input, nu } => {
            let p = params(input.q)?;
            let mut f = load(&input, &p, g.grid)?;
            if input.sample.is_some() {
                f = f.with_branch_zeroed(Sign::Neg);
            }
            save(&input, &frac_apply(&f, nu)?)
        }
        Cmd::Verify { suite, q, seed, out, expr } => {
            if let Some(expr) = expr {
                let nf = qlattice::braided::parse::evaluate(&expr)?;
                println!("{}", json!({ "expr": expr, "normal_form": nf.to_string() }));
                return Ok(());
            }
            let cfg = SuiteConfig { qs: q, seed, series_tol: g.tol, max_terms: g.terms };
            for &q in &cfg.qs {
                cfg.params(q)?;
            }
            let reports = run_suite(suite.into(), &cfg)?;
            let text = serde_json::to_string_pretty(&reports).expect("json");
            match out {
                Some(path) => {
                    let mut w = File::create(&path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
                    writeln!(w, "{text}").map_err(|e| Failure::Usage(e.to_string()))?;
                }
                None => println!("{text}"),
            }
            let failed: Vec<_> = reports.iter().filter(|r| !r.passed()).map(|r| r.check_id.as_str()).collect();
            eprintln!("{} checks, {} failed", reports.len(), failed.len());
            for id in &failed {
                eprintln!("  FAIL {id}");
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Checks)
            }
        }
    }
}

fn load(input: &InputArgs, p: &QParams, grid: Option<(i64, i64)>) -> Result<LatticeFunction, Failure> {
    if let Some(name) = &input.sample {
        let sample: Sample = name.parse()?;
        let (lo, hi) = grid.unwrap_or(DEFAULT_SAMPLE_GRID);
        return Ok(sample.on(LatticeGrid::new(*p, lo, hi)?));
    }
    let path = input.input.as_ref().expect("clap requires --input or --sample");
    let reader: Box<dyn Read> = if path.as_os_str() == "-" {
        Box::new(io::stdin())
    } else {
        Box::new(BufReader::new(File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?))
    };
    Ok(read_csv(reader, *p)?)
}

fn save(input: &InputArgs, f: &LatticeFunction) -> Result<(), Failure> {
    match &input.output {
        Some(path) => {
            let w = File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            write_csv(BufWriter::new(w), f)?;
        }
        None => write_csv(io::stdout().lock(), f)?,
    }
    Ok(())
}

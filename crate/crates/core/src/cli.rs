//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
//! failures. Errors are reported as one JSON object on stderr.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::brown::{
    density_grid_for, domain_boundary, ring_radii, BrownProblem, GridOptions, GridSpec, Margin,
};
use crate::error::{Error, Result};
use crate::measures::{symmetrize, PositiveMeasure, SymmetricMeasure};
use crate::operator_models::{radial_cdf, OperatorModel, RDiagonalSpec, RealMeasure};
use crate::rmt_oracle::{
    compare_report, empirical_brown_density, ComparisonReport, EnsembleSpec, DEFAULT_T_REG,
};
use crate::subordination::{classify_boundary, solve_subordination};

#[derive(Debug, Parser)]
#[command(
    name = "brownkit",
    version,
    about = "Brown measures of x0 + T for R-diagonal T"
)]
struct Cli {
    /// Worker threads (default: BROWNKIT_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Operators {
    /// R-diagonal part: circular:EPS, haar:GAMMA, cauchy:A, cauchy-power:N, or a JSON file.
    #[arg(long = "t")]
    t: String,
    /// Deterministic part: zero, bernoulli:X,M;X,M..., normal:RE,IM,M;..., semicircle:VAR, or a JSON file.
    #[arg(long, default_value = "zero")]
    x0: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Density grid as CSV, JSON and PGM heatmap.
    Density {
        #[command(flatten)]
        ops: Operators,
        /// LO:HI:N for both axes.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        /// LO:HI:N along the real axis (overrides --grid).
        #[arg(long, allow_hyphen_values = true)]
        grid_x: Option<String>,
        /// LO:HI:N along the imaginary axis (overrides --grid).
        #[arg(long, allow_hyphen_values = true)]
        grid_y: Option<String>,
        #[arg(long, default_value_t = 1)]
        supersample: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        heatmap: Option<PathBuf>,
    },
    /// Fuglede-Kadison determinant at one point.
    Det {
        #[command(flatten)]
        ops: Operators,
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        treg: f64,
        /// Print the full record as JSON instead of the value.
        #[arg(long)]
        verbose: bool,
    },
    /// Domain membership at a point and boundary points on a grid.
    Domain {
        #[command(flatten)]
        ops: Operators,
        #[arg(long, allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ring radii of T1 + T2.
    Radii {
        #[arg(long)]
        t1: String,
        #[arg(long)]
        t2: String,
    },
    /// Subordination pair of two symmetric measures on the imaginary axis.
    Convolve {
        /// semicircle:VAR, bernoulli:GAMMA, cauchy:A, cauchy-power:N, moduli:X,M;..., or a JSON file.
        #[arg(long)]
        mu1: String,
        #[arg(long)]
        mu2: String,
        /// Comma-separated positive t values.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        at: String,
        /// Also classify the boundary values at t = 0.
        #[arg(long)]
        boundary: bool,
    },
    /// Radial distribution of the Brown measure of T.
    RadialCdf {
        #[arg(long = "t")]
        t: String,
        /// Comma-separated radii.
        #[arg(long, allow_hyphen_values = true)]
        r: String,
    },
    /// Random-matrix validation against the theoretical density grid.
    Validate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        empirical_csv: Option<PathBuf>,
        #[arg(long)]
        theory_csv: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
}

fn report(kind: &str, message: String, code: i32) -> i32 {
    let r = ErrorReport {
        error: kind,
        message,
        exit_code: code,
    };
    eprintln!("{}", serde_json::to_string(&r).expect("report serializes"));
    code
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            return report("config", e.to_string(), 2);
        }
    };
    let threads = cli.threads.or_else(|| {
        std::env::var("BROWNKIT_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
    {
        Ok(p) => p,
        Err(e) => return report("config", e.to_string(), 2),
    };
    match pool.install(|| execute(cli.command)) {
        Ok(()) => 0,
        Err(e) => {
            let code = if e.is_config() { 2 } else { 3 };
            report(e.kind(), e.to_string(), code)
        }
    }
}

fn config<T>(what: &str, text: &str) -> Result<T> {
    Err(Error::Config(format!("cannot parse {what} '{text}'")))
}

fn number(text: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .or_else(|_| config("number", text))
}

/// Parses `a+bi`, `a-bi`, `a`, `bi`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return Ok(Complex64::new(number(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let im = match &body[k..] {
                "+" => 1.0,
                "-" => -1.0,
                v => number(v)?,
            };
            Ok(Complex64::new(number(&body[..k])?, im))
        }
        None => {
            let im = match body {
                "" | "+" => 1.0,
                "-" => -1.0,
                v => number(v)?,
            };
            Ok(Complex64::new(0.0, im))
        }
    }
}

fn parse_range(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return config("range LO:HI:N", text);
    }
    let n = parts[2]
        .trim()
        .parse::<usize>()
        .or_else(|_| config("grid size", parts[2]))?;
    Ok((number(parts[0])?, number(parts[1])?, n))
}

fn parse_grid(grid: Option<&str>, gx: Option<&str>, gy: Option<&str>) -> Result<GridSpec> {
    let both = grid.map(parse_range).transpose()?;
    let x = gx.map(parse_range).transpose()?.or(both);
    let y = gy.map(parse_range).transpose()?.or(both);
    match (x, y) {
        (Some(x), Some(y)) => {
            let g = GridSpec {
                x_min: x.0,
                x_max: x.1,
                nx: x.2,
                y_min: y.0,
                y_max: y.1,
                ny: y.2,
            };
            g.validate()?;
            Ok(g)
        }
        _ => Err(Error::Config(
            "a grid is required (--grid or --grid-x and --grid-y)".into(),
        )),
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read '{path}': {e}")))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("malformed JSON in '{path}': {e}")))
}

fn split_inline(text: &str) -> Option<(&str, &str)> {
    text.split_once(':')
}

fn pairs(body: &str, width: usize) -> Result<Vec<Vec<f64>>> {
    body.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            let v: Vec<f64> = p.split(',').map(number).collect::<Result<_>>()?;
            if v.len() != width {
                return config("atom list", body);
            }
            Ok(v)
        })
        .collect()
}

/// Inline or JSON-file form of an R-diagonal spec.
pub fn parse_rdiagonal(text: &str) -> Result<RDiagonalSpec> {
    let spec = match split_inline(text) {
        Some(("circular", v)) => RDiagonalSpec::Circular {
            variance: number(v)?,
        },
        Some(("haar", v)) => RDiagonalSpec::HaarUnitary { gamma: number(v)? },
        Some(("cauchy", v)) => RDiagonalSpec::CircularCauchy { scale: number(v)? },
        Some(("cauchy-power", v)) => RDiagonalSpec::CircularCauchyPower {
            n: v.trim().parse().or_else(|_| config("power", v))?,
        },
        Some(("moduli", v)) => RDiagonalSpec::General {
            measure: PositiveMeasure::from_atoms(
                &pairs(v, 2)?
                    .iter()
                    .map(|p| (p[0], p[1]))
                    .collect::<Vec<_>>(),
            )?,
        },
        _ => read_json(text)?,
    };
    spec.validate()?;
    Ok(spec)
}

/// Inline or JSON-file form of `x₀`.
pub fn parse_operator(text: &str) -> Result<OperatorModel> {
    if text == "zero" {
        return Ok(OperatorModel::zero());
    }
    match split_inline(text) {
        Some(("bernoulli", v)) | Some(("selfadjoint", v)) => OperatorModel::selfadjoint_atoms(
            &pairs(v, 2)?
                .iter()
                .map(|p| (p[0], p[1]))
                .collect::<Vec<_>>(),
        ),
        Some(("normal", v)) => OperatorModel::normal_atoms(
            &pairs(v, 3)?
                .iter()
                .map(|p| (Complex64::new(p[0], p[1]), p[2]))
                .collect::<Vec<_>>(),
        ),
        Some(("semicircle", v)) => Ok(OperatorModel::SelfAdjoint(RealMeasure::semicircle(
            number(v)?,
        )?)),
        _ => read_json(text),
    }
}

/// Inline or JSON-file form of a symmetric measure.
pub fn parse_symmetric(text: &str) -> Result<SymmetricMeasure> {
    match split_inline(text) {
        Some(("semicircle", v)) => SymmetricMeasure::semicircle(number(v)?),
        Some(("bernoulli", v)) => SymmetricMeasure::bernoulli(number(v)?),
        Some(("cauchy", v)) => SymmetricMeasure::cauchy(number(v)?),
        Some(("cauchy-power", v)) => {
            SymmetricMeasure::cauchy_power(v.trim().parse().or_else(|_| config("power", v))?)
        }
        Some(("moduli", v)) => SymmetricMeasure::from_moduli(
            &pairs(v, 2)?
                .iter()
                .map(|p| (p[0], p[1]))
                .collect::<Vec<_>>(),
        ),
        _ => symmetrize(&read_json::<PositiveMeasure>(text)?),
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(number)
        .collect()
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    fs::write(&tmp, bytes).map_err(io)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(e)
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("value serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct DensitySummary {
    nx: usize,
    ny: usize,
    total_mass_estimate: f64,
    max_density: f64,
    failed_cells: usize,
    atom_candidates: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct DomainOutput {
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<crate::brown::DomainVerdict>,
    boundary: Vec<BoundaryPoint>,
}

#[derive(Serialize)]
struct BoundaryPoint {
    x: f64,
    y: f64,
    margin: Margin,
}

#[derive(Serialize)]
struct ConvolveRow {
    t: f64,
    s1: f64,
    s2: f64,
    h: f64,
    residual: f64,
}

#[derive(Serialize)]
struct ConvolveOutput {
    pairs: Vec<ConvolveRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary: Option<crate::subordination::BoundaryClassification>,
}

#[derive(Serialize)]
struct RadialRow {
    r: f64,
    cdf: f64,
}

/// Job file for `validate`. `t` and `x0` take either the inline strings of
/// the other commands or their JSON objects.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateConfig {
    pub t: serde_json::Value,
    #[serde(default = "zero_value")]
    pub x0: serde_json::Value,
    pub n: usize,
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_treg")]
    pub t_reg: f64,
    pub grid: GridSpec,
    #[serde(default = "default_supersample")]
    pub supersample: usize,
    #[serde(default)]
    pub stochastic_sigma: bool,
}

fn zero_value() -> serde_json::Value {
    serde_json::Value::String("zero".into())
}

fn default_treg() -> f64 {
    DEFAULT_T_REG
}

fn default_supersample() -> usize {
    8
}

#[derive(Serialize)]
struct ValidateOutput {
    n: usize,
    samples: usize,
    seed: u64,
    t_reg: f64,
    clamped_mass: f64,
    #[serde(flatten)]
    report: ComparisonReport,
}

fn value_or_inline<T: for<'de> Deserialize<'de>>(
    v: &serde_json::Value,
    inline: fn(&str) -> Result<T>,
) -> Result<T> {
    match v {
        serde_json::Value::String(s) => inline(s),
        other => serde_json::from_value(other.clone())
            .map_err(|e| Error::Config(format!("malformed spec: {e}"))),
    }
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Density {
            ops,
            grid,
            grid_x,
            grid_y,
            supersample,
            out,
            json,
            heatmap,
        } => {
            let problem = BrownProblem::new(&parse_rdiagonal(&ops.t)?, &parse_operator(&ops.x0)?)?;
            let spec = parse_grid(grid.as_deref(), grid_x.as_deref(), grid_y.as_deref())?;
            let g = density_grid_for(&problem, &spec, GridOptions { supersample })?;
            if let Some(p) = &out {
                write_atomic(p, g.to_csv().as_bytes())?;
            }
            if let Some(p) = &json {
                write_atomic(p, g.to_json().as_bytes())?;
            }
            if let Some(p) = &heatmap {
                write_atomic(p, &g.to_pgm())?;
            }
            let summary = DensitySummary {
                nx: spec.nx,
                ny: spec.ny,
                total_mass_estimate: g.total_mass_estimate,
                max_density: g.values.iter().cloned().fold(0.0, f64::max),
                failed_cells: g.failed.iter().filter(|f| **f).count(),
                atom_candidates: g.atoms.iter().map(|a| [a.re, a.im]).collect(),
            };
            emit(None, &to_json(&summary))
        }
        Command::Det {
            ops,
            lambda,
            treg,
            verbose,
        } => {
            let problem = BrownProblem::new(&parse_rdiagonal(&ops.t)?, &parse_operator(&ops.x0)?)?;
            let d = problem.log_determinant(parse_complex(&lambda)?, treg)?;
            if verbose {
                emit(None, &to_json(&d))
            } else {
                emit(None, &format!("{:?}\n", d.value()))
            }
        }
        Command::Domain {
            ops,
            lambda,
            grid,
            out,
        } => {
            let problem = BrownProblem::new(&parse_rdiagonal(&ops.t)?, &parse_operator(&ops.x0)?)?;
            let verdict = lambda
                .map(|l| problem.omega_membership(parse_complex(&l)?))
                .transpose()?;
            let boundary = match grid {
                Some(g) => domain_boundary(&problem, &parse_grid(Some(&g), None, None)?)?
                    .into_iter()
                    .map(|(z, margin)| BoundaryPoint {
                        x: z.re,
                        y: z.im,
                        margin,
                    })
                    .collect(),
                None => vec![],
            };
            if verdict.is_none() && boundary.is_empty() && out.is_none() {
                return Err(Error::Config("domain needs --lambda or --grid".into()));
            }
            emit(
                out.as_deref(),
                &to_json(&DomainOutput { verdict, boundary }),
            )
        }
        Command::Radii { t1, t2 } => emit(
            None,
            &to_json(&ring_radii(&parse_rdiagonal(&t1)?, &parse_rdiagonal(&t2)?)?),
        ),
        Command::Convolve {
            mu1,
            mu2,
            at,
            boundary,
        } => {
            let (m1, m2) = (parse_symmetric(&mu1)?, parse_symmetric(&mu2)?);
            let pairs = parse_list(&at)?
                .into_iter()
                .map(|t| {
                    let p = solve_subordination(&m1, &m2, t)?;
                    Ok(ConvolveRow {
                        t,
                        s1: p.s1,
                        s2: p.s2,
                        h: p.h_conv,
                        residual: p.residual,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let boundary = if boundary {
                Some(classify_boundary(&m1, &m2)?)
            } else {
                None
            };
            if pairs.is_empty() && boundary.is_none() {
                return Err(Error::Config(
                    "convolve needs --at values or --boundary".into(),
                ));
            }
            emit(None, &to_json(&ConvolveOutput { pairs, boundary }))
        }
        Command::RadialCdf { t, r } => {
            let spec = parse_rdiagonal(&t)?;
            let rows = parse_list(&r)?
                .into_iter()
                .map(|r| {
                    Ok(RadialRow {
                        r,
                        cdf: radial_cdf(&spec, r)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            emit(None, &to_json(&rows))
        }
        Command::Validate {
            config,
            seed,
            out,
            empirical_csv,
            theory_csv,
        } => {
            let cfg: ValidateConfig = read_json(&config.to_string_lossy())?;
            let t = value_or_inline(&cfg.t, parse_rdiagonal)?;
            let x0 = value_or_inline(&cfg.x0, parse_operator)?;
            let mut ens = EnsembleSpec::new(
                t.clone(),
                x0.clone(),
                cfg.n,
                cfg.samples,
                seed.unwrap_or(cfg.seed),
            );
            ens.t_reg = cfg.t_reg;
            ens.stochastic_sigma = cfg.stochastic_sigma;
            ens.validate()?;
            let problem = BrownProblem::new(&t, &x0)?;
            let theory = density_grid_for(
                &problem,
                &cfg.grid,
                GridOptions {
                    supersample: cfg.supersample,
                },
            )?;
            let empirical = empirical_brown_density(&ens, &cfg.grid)?;
            if let Some(p) = &empirical_csv {
                write_atomic(p, empirical.grid.to_csv().as_bytes())?;
            }
            if let Some(p) = &theory_csv {
                write_atomic(p, theory.to_csv().as_bytes())?;
            }
            let report = compare_report(&theory, &empirical.grid)?;
            let output = ValidateOutput {
                n: ens.n,
                samples: ens.samples,
                seed: ens.seed,
                t_reg: ens.t_reg,
                clamped_mass: empirical.clamped_mass,
                report,
            };
            emit(out.as_deref(), &to_json(&output))
        }
    }
}

//! The `theta-kummer` command line: JSON reports on standard output,
//! diagnostics on standard error.
//!
//! Exit codes: 0 the command ran (a failing identity is a result, reported
//! in the JSON), 2 input error, 3 evaluation error.

mod files;
mod parse;
mod request;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

pub use files::{PeriodMatrixFile, RunReportFile, Tolerances};
pub use request::Request;

use crate::error::Error;
use crate::kummer::Gamma00Instance;
use crate::numeric::rng::SeededRng;
use crate::numeric::{CPoint, C64};
use crate::scenarios::{sample_direction, sample_point, sample_siegel};
use crate::theta::{default_tol, PeriodMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_EVALUATION: i32 = 3;
pub const DEFAULT_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Parser)]
#[command(name = "theta-kummer", version, about = "Riemann theta functions, Kummer vectors and Jacobian residual checks")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate θ(B, z), or Θ[ε](B, z) with --char, and directional derivatives.
    Theta(ThetaArgs),
    /// Evaluate one identity residual.
    Check {
        #[command(subcommand)]
        which: CheckCommand,
    },
    /// Run the genus-2 pipeline or the exploratory scan.
    Pipeline(PipelineArgs),
    /// Re-run the inputs of a report and compare outputs bit for bit.
    Replay {
        /// A report previously written by this tool.
        report: PathBuf,
    },
}

#[derive(Debug, Args)]
struct MatrixArgs {
    /// Period matrix file ({"g", "re", "im"}).
    #[arg(long, conflicts_with = "sample")]
    pm: Option<PathBuf>,
    /// Sample a period matrix: g,seed,offdiag_scale.
    #[arg(long)]
    sample: Option<String>,
}

#[derive(Debug, Args)]
struct Common {
    /// Truncation tolerance (default 1e-12 for g <= 3, else 1e-10).
    #[arg(long)]
    tol: Option<f64>,
    /// Residuals below this pass.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Seed for any inputs not given explicitly.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ThetaArgs {
    #[command(flatten)]
    matrix: MatrixArgs,
    /// Argument, e.g. "0.1+0.2i,0.3".
    #[arg(long)]
    z: String,
    /// Characteristic bits, e.g. "01".
    #[arg(long = "char")]
    characteristic: Option<String>,
    /// Derivative directions separated by ';': U, V, eK or explicit coordinates.
    #[arg(long)]
    deriv: Option<String>,
    #[arg(long = "U")]
    u: Option<String>,
    #[arg(long = "V")]
    v: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum CheckCommand {
    /// θ(z+Z)θ(z−Z) against K(z)·K(Z).
    Bilinear {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        z: Option<String>,
        #[arg(long = "Z")]
        zz: Option<String>,
    },
    /// K(P) against c K(0) + ∂_U∂_V K(0); without --c, c and b are fitted.
    Gamma00 {
        /// Instance file with pm, P, U, V, c (as written by `pipeline --instance-out`).
        #[arg(long, conflicts_with_all = ["pm", "sample"])]
        instance: Option<PathBuf>,
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long = "P")]
        p: Option<String>,
        #[arg(long = "U")]
        u: Option<String>,
        #[arg(long = "V")]
        v: Option<String>,
        #[arg(long)]
        c: Option<String>,
    },
    /// Collinearity of the trisecant triple for --points "p;p1;p2;p3".
    Trisecant {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: Option<String>,
    },
    /// Collinearity of the semidegenerate triple for --points "p;p1;q".
    Semidegenerate {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: Option<String>,
        #[arg(long = "U")]
        u: Option<String>,
    },
    /// The on-divisor identity at --points "z".
    DivisorIdentity {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: Option<String>,
        #[arg(long = "U")]
        u: Option<String>,
        #[arg(long = "P")]
        p: Option<String>,
    },
    /// (c + u)ψ = Tψ at --points "x,y,t;..." for τ = θ(Ux + Vy + Pt + Z).
    Upsi {
        #[command(flatten)]
        matrix: MatrixArgs,
        #[command(flatten)]
        common: Common,
        #[arg(long = "U")]
        u: Option<String>,
        #[arg(long = "V")]
        v: Option<String>,
        #[arg(long = "P")]
        p: Option<String>,
        #[arg(long = "Z")]
        zz: Option<String>,
        #[arg(long)]
        c: Option<String>,
        #[arg(long)]
        points: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    G2,
    Scan,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    #[command(flatten)]
    matrix: MatrixArgs,
    #[command(flatten)]
    common: Common,
    /// Random starts for --mode scan.
    #[arg(long, default_value_t = 200)]
    iters: usize,
    /// Also write the fitted instance (P, bU, V, c) here (--mode g2).
    #[arg(long)]
    instance_out: Option<PathBuf>,
}

/// An input problem (exit 2) or a failed evaluation (exit 3).
enum Failure {
    Input(Error),
    Evaluation(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch { .. } | Error::NotPositiveDefinite { .. } | Error::InvalidInput(_) => Failure::Input(e),
            e => Failure::Evaluation(e),
        }
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(Error::InvalidInput(msg.into()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| input(format!("cannot read {}: {e}", path.display())))
}

/// Source of every value not given on the command line.
struct Resolver {
    rng: Option<SeededRng>,
}

impl Resolver {
    fn new(seed: Option<u64>) -> Self {
        Resolver { rng: seed.map(SeededRng::new) }
    }

    fn rng(&mut self, what: &str) -> Result<&mut SeededRng, Failure> {
        self.rng.as_mut().ok_or_else(|| input(format!("missing {what} (or pass --seed to sample it)")))
    }

    fn point(&mut self, text: &Option<String>, pm: &PeriodMatrix, what: &str) -> Result<CPoint, Failure> {
        match text {
            Some(t) => Ok(parse::point(t, pm.genus())?),
            None => Ok(sample_point(pm, self.rng(what)?)),
        }
    }

    fn direction(&mut self, text: &Option<String>, g: usize, what: &str) -> Result<CPoint, Failure> {
        match text {
            Some(t) => Ok(parse::point(t, g)?),
            None => Ok(sample_direction(g, self.rng(what)?)),
        }
    }

    fn scalar(&mut self, text: &Option<String>, what: &str) -> Result<C64, Failure> {
        match text {
            Some(t) => Ok(parse::complex(t)?),
            None => Ok(self.rng(what)?.complex_in(1.0)),
        }
    }

    fn points(&mut self, text: &Option<String>, pm: &PeriodMatrix, n: usize, what: &str) -> Result<Vec<CPoint>, Failure> {
        let pts = match text {
            Some(t) => parse::points(t, pm.genus())?,
            None => {
                let rng = self.rng(what)?;
                (0..n).map(|_| sample_point(pm, rng)).collect()
            }
        };
        if pts.len() != n {
            return Err(input(format!("{what} needs {n} points separated by ';', got {}", pts.len())));
        }
        Ok(pts)
    }
}

fn load_matrix(m: &MatrixArgs) -> Result<PeriodMatrix, Failure> {
    match (&m.pm, &m.sample) {
        (Some(path), None) => Ok(PeriodMatrixFile::parse(&read(path)?)?),
        (None, Some(spec)) => {
            let (g, seed, scale) = parse::sample_spec(spec)?;
            Ok(sample_siegel(g, seed, scale)?)
        }
        _ => Err(input("give exactly one of --pm FILE or --sample g,seed,scale")),
    }
}

fn tol_for(tol: Option<f64>, pm: &PeriodMatrix) -> Result<f64, Failure> {
    let tol = tol.unwrap_or_else(|| default_tol(pm.genus()));
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(input(format!("--tol must be positive, got {tol}")));
    }
    Ok(tol)
}

fn theta_request(a: &ThetaArgs) -> Result<Request, Failure> {
    let pm = load_matrix(&a.matrix)?;
    let g = pm.genus();
    let z = parse::point(&a.z, g)?;
    let characteristic = a.characteristic.as_deref().map(|c| parse::bits(c, g)).transpose()?;
    let mut deriv = Vec::new();
    for item in a.deriv.as_deref().unwrap_or("").split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let named = |text: &Option<String>, name: &str| -> Result<CPoint, Failure> {
            let t = text.as_ref().ok_or_else(|| input(format!("--deriv uses {name} but --{name} is not given")))?;
            Ok(parse::point(t, g)?)
        };
        let dir = match item {
            "U" => named(&a.u, "U")?,
            "V" => named(&a.v, "V")?,
            s if s.starts_with('e') && s[1..].parse::<usize>().is_ok() => {
                let k: usize = s[1..].parse().expect("checked");
                if k == 0 || k > g {
                    return Err(input(format!("basis direction {s} out of range 1..={g}")));
                }
                CPoint::basis(g, k - 1)
            }
            s => parse::point(s, g)?,
        };
        deriv.push(dir);
    }
    let tol = tol_for(a.tol, &pm)?;
    Ok(Request::Theta { pm, z, characteristic, deriv, tol })
}

fn check_request(which: &CheckCommand) -> Result<Request, Failure> {
    match which {
        CheckCommand::Bilinear { matrix, common, z, zz } => {
            let pm = load_matrix(matrix)?;
            let mut r = Resolver::new(common.seed);
            let z = r.point(z, &pm, "--z")?;
            let zz = r.point(zz, &pm, "--Z")?;
            Ok(Request::CheckBilinear { tol: tol_for(common.tol, &pm)?, threshold: common.threshold, pm, z, zz })
        }
        CheckCommand::Gamma00 { instance, matrix, common, p, u, v, c } => {
            if let Some(path) = instance {
                let inst: Gamma00Instance = serde_json::from_str(&read(path)?)
                    .map_err(|e| input(format!("malformed instance file {}: {e}", path.display())))?;
                let Gamma00Instance { pm, p, u, v, c } = Gamma00Instance::new(inst.pm, inst.p, inst.u, inst.v, inst.c)?;
                return Ok(Request::CheckGamma00 { tol: tol_for(common.tol, &pm)?, threshold: common.threshold, pm, p, u, v, c: Some(c) });
            }
            let pm = load_matrix(matrix)?;
            let g = pm.genus();
            let mut r = Resolver::new(common.seed);
            let p = r.point(p, &pm, "--P")?;
            let u = r.direction(u, g, "--U")?;
            let v = r.direction(v, g, "--V")?;
            let c = c.as_deref().map(parse::complex).transpose()?;
            Ok(Request::CheckGamma00 { tol: tol_for(common.tol, &pm)?, threshold: common.threshold, pm, p, u, v, c })
        }
        CheckCommand::Trisecant { matrix, common, points } => {
            let pm = load_matrix(matrix)?;
            let points = Resolver::new(common.seed).points(points, &pm, 4, "--points")?;
            Ok(Request::CheckTrisecant { tol: tol_for(common.tol, &pm)?, threshold: common.threshold, pm, points })
        }
        CheckCommand::Semidegenerate { matrix, common, points, u } => {
            let pm = load_matrix(matrix)?;
            let mut r = Resolver::new(common.seed);
            let points = r.points(points, &pm, 3, "--points")?;
            let u = r.direction(u, pm.genus(), "--U")?;
            Ok(Request::CheckSemidegenerate { tol: tol_for(common.tol, &pm)?, threshold: common.threshold, pm, points, u })
        }
        CheckCommand::DivisorIdentity { matrix, common, points, u, p } => {
            let pm = load_matrix(matrix)?;
            let mut r = Resolver::new(common.seed);
            let z = r.points(points, &pm, 1, "--points")?.remove(0);
            let u = r.direction(u, pm.genus(), "--U")?;
            let p = r.point(p, &pm, "--P")?;
            Ok(Request::CheckDivisorIdentity { tol: tol_for(common.tol, &pm)?, threshold: common.threshold, pm, z, u, p })
        }
        CheckCommand::Upsi { matrix, common, u, v, p, zz, c, points } => {
            let pm = load_matrix(matrix)?;
            let g = pm.genus();
            let mut r = Resolver::new(common.seed);
            let u = r.direction(u, g, "--U")?;
            let v = r.direction(v, g, "--V")?;
            let p = r.point(p, &pm, "--P")?;
            let zz = r.point(zz, &pm, "--Z")?;
            let c = r.scalar(c, "--c")?;
            let points = match points {
                Some(t) => parse::triples(t)?,
                None => {
                    let rng = r.rng("--points")?;
                    vec![[rng.complex_in(0.5), rng.complex_in(0.5), rng.complex_in(0.5)]]
                }
            };
            Ok(Request::CheckUpsi { tol: tol_for(common.tol, &pm)?, threshold: common.threshold, pm, u, v, p, zz, c, points })
        }
    }
}

fn pipeline_request(a: &PipelineArgs) -> Result<Request, Failure> {
    let pm = load_matrix(&a.matrix)?;
    let tol = tol_for(a.common.tol, &pm)?;
    // the pipeline seed defaults to the sampling seed
    let sample_seed = a.matrix.sample.as_deref().map(parse::sample_spec).transpose()?.map(|s| s.1);
    let seed = a.common.seed.or(sample_seed).unwrap_or(0);
    match a.mode {
        Mode::G2 => Ok(Request::PipelineG2 { pm, seed, tol, threshold: a.common.threshold }),
        Mode::Scan => {
            if a.iters == 0 {
                return Err(input("--iters must be at least 1"));
            }
            Ok(Request::PipelineScan { pm, seed, iters: a.iters, tol })
        }
    }
}

fn report(req: Request) -> Result<RunReportFile, Failure> {
    let outputs = req.execute()?;
    Ok(RunReportFile {
        command: req.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: req.seed(),
        tolerances: req.tolerances(),
        inputs: req,
        outputs,
    })
}

fn write_json(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    writeln!(out, "{text}").map_err(|e| input(format!("cannot write output: {e}")))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    match &cli.command {
        Command::Theta(a) => write_json(out, &report(theta_request(a)?)?),
        Command::Check { which } => write_json(out, &report(check_request(which)?)?),
        Command::Pipeline(a) => {
            let rep = report(pipeline_request(a)?)?;
            if let Some(path) = &a.instance_out {
                let witness = rep
                    .outputs
                    .pointer("/report/witness")
                    .ok_or_else(|| input("--instance-out needs --mode g2"))?;
                let text = serde_json::to_string_pretty(witness).expect("instances serialize");
                std::fs::write(path, text).map_err(|e| input(format!("cannot write {}: {e}", path.display())))?;
            }
            write_json(out, &rep)
        }
        Command::Replay { report: path } => {
            let original = RunReportFile::parse(&read(path)?)?;
            let rerun = report(original.inputs.clone())?;
            let identical = rerun.outputs == original.outputs;
            write_json(
                out,
                &json!({ "command": original.command, "identical": identical, "original": original.outputs, "replayed": rerun.outputs }),
            )
        }
    }
}

/// Runs the command line `args` (program name first), writing the report to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{rendered}") } else { write!(out, "{rendered}") };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let (code, e) = match f {
                Failure::Input(e) => (EXIT_INPUT, e),
                Failure::Evaluation(e) => (EXIT_EVALUATION, e),
            };
            let diag = json!({ "error": e.name(), "message": e.to_string() });
            let _ = writeln!(err, "{diag}");
            code
        }
    }
}

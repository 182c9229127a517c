use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rpbm_bench::audit::{audit_csv, AuditParams};
use rpbm_bench::config::{load_config, Experiment};
use rpbm_bench::experiment::{estimate_constants, run_experiment};
use rpbm_bench::plot::{render_svg, XAxis, YAxis};
use rpbm_bench::trace::read_trace_csv;
use rpbm_bench::BenchError;

#[derive(Parser)]
#[command(name = "rpbm", version, about = "Riemannian proximal bundle experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Riemannian median of random SPD matrices.
    Median(RunArgs),
    /// Total-variation denoising of a square wave on (H_2)^n.
    Denoise(RunArgs),
    /// Synthetic objectives with known minimum (l1 or sharp distance).
    Toy(RunArgs),
    /// Estimate the retraction and transporter error constants.
    ConstantsEstimate(RunArgs),
    /// Check the per-iteration invariants of a trace CSV.
    Audit(AuditArgs),
    /// Plot one or more traces as SVG.
    Plot(PlotArgs),
}

/// Flags shared by the experiment subcommands. Each one overrides the same
/// key of the config file.
#[derive(Args, Default)]
struct RunArgs {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    n_points: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    rho0: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    budget: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    /// exact | retraction
    #[arg(long)]
    primitives: Option<String>,
    /// parallel | projection
    #[arg(long)]
    transport: Option<String>,
    /// backtracking | constant | growth
    #[arg(long)]
    schedule: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    fstar: Option<String>,
    /// Trace CSV path.
    #[arg(long)]
    out: Option<String>,
    /// SVG plot path (needs --out).
    #[arg(long)]
    plot: Option<String>,
    /// rpb | sgm
    #[arg(long)]
    algorithm: Option<String>,
    /// Stop once the objective gap is below this (known optimum only).
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    /// l1 | sharp
    #[arg(long)]
    toy: Option<String>,
    /// euclidean | hyperbolic | spd | hyperbolic-product
    #[arg(long)]
    space: Option<String>,
    /// Directory for cached reference values.
    #[arg(long)]
    cache_dir: Option<String>,
}

impl RunArgs {
    fn flags(&self) -> Vec<(String, String)> {
        let pairs = [
            ("dim", &self.dim),
            ("n_points", &self.n_points),
            ("beta", &self.beta),
            ("rho0", &self.rho0),
            ("seed", &self.seed),
            ("budget", &self.budget),
            ("tol", &self.tol),
            ("primitives", &self.primitives),
            ("transport", &self.transport),
            ("schedule", &self.schedule),
            ("mu", &self.mu),
            ("p", &self.p),
            ("fstar", &self.fstar),
            ("out", &self.out),
            ("plot", &self.plot),
            ("algorithm", &self.algorithm),
            ("eps", &self.eps),
            ("alpha", &self.alpha),
            ("sigma", &self.sigma),
            ("toy", &self.toy),
            ("space", &self.space),
            ("cache_dir", &self.cache_dir),
        ];
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }
}

#[derive(Args)]
struct AuditArgs {
    trace: PathBuf,
    #[arg(long)]
    beta: f64,
    /// Lipschitz bound of the objective.
    #[arg(long, default_value_t = 1.0)]
    lip: f64,
    /// Initial rho; defaults to the first row's.
    #[arg(long)]
    rho0: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    c_r: f64,
    #[arg(long, default_value_t = 0.0)]
    c_t: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum YArg {
    Gap,
    F,
}

#[derive(Clone, Copy, ValueEnum)]
enum XArg {
    OracleCalls,
    WallNs,
}

#[derive(Args)]
struct PlotArgs {
    /// Traces as `label=path` (or just `path`).
    #[arg(required = true)]
    traces: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = YArg::Gap)]
    y: YArg,
    #[arg(long, value_enum, default_value_t = XArg::OracleCalls)]
    x: XArg,
    #[arg(long)]
    fstar: Option<f64>,
}

fn experiment(exp: Experiment, args: &RunArgs) -> Result<ExitCode, BenchError> {
    let cfg = load_config(exp, args.config.as_deref(), &args.flags())?;
    if exp == Experiment::ConstantsEstimate {
        let c = estimate_constants(&cfg)?;
        println!("c_r {:.6e}", c.c_r);
        println!("c_t {:.6e}", c.c_t);
        println!("radius {:.6e}", c.radius);
        return Ok(ExitCode::SUCCESS);
    }
    let art = run_experiment(&cfg)?;
    for w in &art.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}", art.summary);
    if let Some(p) = &art.trace_csv {
        println!("trace          {}", p.display());
    }
    if let Some(p) = &art.plot {
        println!("plot           {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn audit(a: &AuditArgs) -> Result<ExitCode, BenchError> {
    let rho0 = match a.rho0 {
        Some(r) => r,
        None => read_trace_csv(&a.trace)?.first().map_or(1.0, |r| r.rho),
    };
    let params = AuditParams::new(a.beta, rho0, a.lip, a.c_r, a.c_t);
    let rep = audit_csv(&a.trace, &params)?;
    print!("{rep}");
    Ok(if rep.passed() { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn plot(a: &PlotArgs) -> Result<ExitCode, BenchError> {
    let traces: Vec<(String, PathBuf)> = a
        .traces
        .iter()
        .map(|t| match t.split_once('=') {
            Some((label, path)) => (label.to_string(), PathBuf::from(path)),
            None => {
                let p = PathBuf::from(t);
                let label = p.file_stem().map_or(t.clone(), |s| s.to_string_lossy().into_owned());
                (label, p)
            }
        })
        .collect();
    let y = match a.y {
        YArg::Gap => YAxis::Gap,
        YArg::F => YAxis::F,
    };
    let x = match a.x {
        XArg::OracleCalls => XAxis::OracleCalls,
        XArg::WallNs => XAxis::WallNs,
    };
    render_svg(&traces, y, x, a.fstar, &a.out)?;
    println!("wrote {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Median(a) => experiment(Experiment::Median, a),
        Cmd::Denoise(a) => experiment(Experiment::Denoise, a),
        Cmd::Toy(a) => experiment(Experiment::Toy, a),
        Cmd::ConstantsEstimate(a) => experiment(Experiment::ConstantsEstimate, a),
        Cmd::Audit(a) => audit(a),
        Cmd::Plot(a) => plot(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

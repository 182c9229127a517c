//! Experiment configuration: defaults per experiment, a line-based
//! `key = value` file format and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rpbm::bundle::ScheduleMode;
use rpbm::{RetractionKind, TransportKind};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Median,
    Denoise,
    Toy,
    ConstantsEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Rpb,
    Sgm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ToyKind {
    /// Weighted l1 distance to a fixed point on `R^d`.
    L1,
    /// Geodesic distance to a fixed point.
    Sharp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Euclidean,
    Hyperbolic,
    Spd,
    /// `(H_2)^n`.
    HyperbolicProduct,
}

macro_rules! keyword_enum {
    ($ty:ty { $($name:literal => $var:expr),* $(,)? }) => {
        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($name => Ok($var),)*
                    other => Err(format!(
                        "unknown value {other:?}, expected one of: {}",
                        [$($name),*].join(", ")
                    )),
                }
            }
        }
    };
}

keyword_enum!(Experiment {
    "median" => Experiment::Median,
    "denoise" => Experiment::Denoise,
    "toy" => Experiment::Toy,
    "constants-estimate" => Experiment::ConstantsEstimate,
});
keyword_enum!(Algorithm { "rpb" => Algorithm::Rpb, "sgm" => Algorithm::Sgm });
keyword_enum!(ToyKind { "l1" => ToyKind::L1, "sharp" => ToyKind::Sharp });
keyword_enum!(Space {
    "euclidean" => Space::Euclidean,
    "hyperbolic" => Space::Hyperbolic,
    "spd" => Space::Spd,
    "hyperbolic-product" => Space::HyperbolicProduct,
});

/// Parses `exact | retraction`.
pub fn parse_primitives(s: &str) -> std::result::Result<RetractionKind, String> {
    match s {
        "exact" => Ok(RetractionKind::Exact),
        "retraction" => Ok(RetractionKind::FirstOrder),
        other => Err(format!("unknown value {other:?}, expected one of: exact, retraction")),
    }
}

/// Parses `parallel | projection`.
pub fn parse_transport(s: &str) -> std::result::Result<TransportKind, String> {
    match s {
        "parallel" => Ok(TransportKind::Parallel),
        "projection" => Ok(TransportKind::Projection),
        other => Err(format!("unknown value {other:?}, expected one of: parallel, projection")),
    }
}

/// Parses `backtracking | constant | growth`.
pub fn parse_schedule(s: &str) -> std::result::Result<ScheduleMode, String> {
    match s {
        "backtracking" => Ok(ScheduleMode::Backtracking),
        "constant" => Ok(ScheduleMode::Constant),
        "growth" => Ok(ScheduleMode::Growth),
        other => Err(format!(
            "unknown value {other:?}, expected one of: backtracking, constant, growth"
        )),
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::Median => "median",
            Experiment::Denoise => "denoise",
            Experiment::Toy => "toy",
            Experiment::ConstantsEstimate => "constants-estimate",
        })
    }
}

/// Subgradient step-size rule for the baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SgmSteps {
    Geometric { c: f64, q: f64 },
    InverseSqrt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub algorithm: Algorithm,
    /// Matrix size (SPD), space dimension (hyperbolic, Euclidean).
    pub dim: usize,
    /// Data points (median) or signal length (denoise).
    pub n_points: usize,
    pub toy: ToyKind,
    pub space: Space,
    pub primitives: RetractionKind,
    /// `None` picks parallel transport for exact primitives and the
    /// projection otherwise.
    pub transport: Option<TransportKind>,
    pub schedule: ScheduleMode,
    pub rho0: f64,
    pub beta: f64,
    pub mu: f64,
    pub p: f64,
    pub f_star: Option<f64>,
    pub seed: u64,
    pub budget: usize,
    /// Relative stopping tolerance on the model proximal gap.
    pub tol: f64,
    /// Target objective gap (used when the optimal value is known).
    pub eps: f64,
    pub max_doublings: usize,
    pub alpha: f64,
    pub sigma: f64,
    pub spread: f64,
    pub sgm: SgmSteps,
    /// Samples used to estimate the primitive error constants.
    pub calib_samples: usize,
    /// Step radius for `constants-estimate`; `None` uses `2 L / rho0`.
    pub calib_radius: Option<f64>,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            algorithm: Algorithm::Rpb,
            dim: 10,
            n_points: 20,
            toy: ToyKind::L1,
            space: Space::Euclidean,
            primitives: RetractionKind::Exact,
            transport: None,
            schedule: ScheduleMode::Backtracking,
            rho0: 1.0,
            beta: 0.1,
            mu: 1.0,
            p: 1.0,
            f_star: None,
            seed: 0,
            budget: 5000,
            tol: 1e-10,
            eps: 0.0,
            max_doublings: 200,
            alpha: 0.5,
            sigma: 0.3,
            spread: 1.0,
            sgm: SgmSteps::Geometric { c: 2.0, q: 0.95 },
            calib_samples: 500,
            calib_radius: None,
            out: None,
            plot: None,
            cache_dir: None,
        };
        match experiment {
            Experiment::Median => Self {
                dim: 55,
                n_points: 20,
                space: Space::Spd,
                ..base
            },
            Experiment::Denoise => Self {
                dim: 2,
                n_points: 496,
                space: Space::HyperbolicProduct,
                beta: 0.001,
                budget: 100_000,
                sgm: SgmSteps::InverseSqrt,
                ..base
            },
            Experiment::Toy => base,
            Experiment::ConstantsEstimate => Self {
                dim: 3,
                n_points: 8,
                space: Space::Spd,
                calib_samples: 2000,
                ..base
            },
        }
    }

    /// Transport actually used by a run.
    pub fn transport_kind(&self) -> TransportKind {
        self.transport.unwrap_or(match self.primitives {
            RetractionKind::Exact => TransportKind::Parallel,
            RetractionKind::FirstOrder => TransportKind::Projection,
        })
    }

    /// Known optimal value of the toy objectives.
    pub fn known_f_star(&self) -> Option<f64> {
        match self.experiment {
            Experiment::Toy => Some(0.0),
            _ => None,
        }
    }

    /// Sets one field from its textual form. Keys use underscores; dashes
    /// are accepted as well so flag names map directly.
    pub fn apply(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn num<T: FromStr>(v: &str) -> std::result::Result<T, String>
        where
            T::Err: fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("cannot parse {v:?}: {e}"))
        }
        let key = key.replace('-', "_");
        match key.as_str() {
            "experiment" => {
                let e: Experiment = value.parse()?;
                if e != self.experiment {
                    return Err(format!("config is for {e} but {} was requested", self.experiment));
                }
            }
            "algorithm" => self.algorithm = value.parse()?,
            "dim" => self.dim = num(value)?,
            "n_points" => self.n_points = num(value)?,
            "toy" => self.toy = value.parse()?,
            "space" | "manifold" => self.space = value.parse()?,
            "primitives" => self.primitives = parse_primitives(value)?,
            "transport" => self.transport = Some(parse_transport(value)?),
            "schedule" => self.schedule = parse_schedule(value)?,
            "rho0" => self.rho0 = num(value)?,
            "beta" => self.beta = num(value)?,
            "mu" => self.mu = num(value)?,
            "p" => self.p = num(value)?,
            "fstar" | "f_star" => self.f_star = Some(num(value)?),
            "seed" => self.seed = num(value)?,
            "budget" => self.budget = num(value)?,
            "tol" => self.tol = num(value)?,
            "eps" => self.eps = num(value)?,
            "max_doublings" => self.max_doublings = num(value)?,
            "alpha" => self.alpha = num(value)?,
            "sigma" => self.sigma = num(value)?,
            "spread" => self.spread = num(value)?,
            "sgm_steps" => {
                self.sgm = match value {
                    "geometric" => match self.sgm {
                        g @ SgmSteps::Geometric { .. } => g,
                        SgmSteps::InverseSqrt => SgmSteps::Geometric { c: 2.0, q: 0.95 },
                    },
                    "inverse-sqrt" => SgmSteps::InverseSqrt,
                    other => {
                        return Err(format!(
                            "unknown value {other:?}, expected one of: geometric, inverse-sqrt"
                        ))
                    }
                }
            }
            "sgm_c" | "sgm_q" => {
                let v: f64 = num(value)?;
                let (mut c, mut q) = match self.sgm {
                    SgmSteps::Geometric { c, q } => (c, q),
                    SgmSteps::InverseSqrt => (2.0, 0.95),
                };
                if key == "sgm_c" {
                    c = v;
                } else {
                    q = v;
                }
                self.sgm = SgmSteps::Geometric { c, q };
            }
            "calib_samples" => self.calib_samples = num(value)?,
            "calib_radius" => self.calib_radius = Some(num(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "plot" => self.plot = Some(PathBuf::from(value)),
            "cache_dir" => self.cache_dir = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !(self.beta > 0.0 && self.beta < 1.0) {
            bad.push(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.rho0 > 0.0 && self.rho0.is_finite()) {
            bad.push(format!("rho0 must be > 0, got {}", self.rho0));
        }
        if self.dim == 0 {
            bad.push("dim must be >= 1".into());
        }
        if self.n_points == 0 {
            bad.push("n_points must be >= 1".into());
        }
        if !(self.tol >= 0.0) || !(self.eps >= 0.0) {
            bad.push("tol and eps must be >= 0".into());
        }
        if !(self.alpha > 0.0) {
            bad.push(format!("alpha must be > 0, got {}", self.alpha));
        }
        if !(self.sigma >= 0.0) || !(self.spread >= 0.0) {
            bad.push("sigma and spread must be >= 0".into());
        }
        if !(self.mu > 0.0) || !(self.p >= 1.0) {
            bad.push(format!("need mu > 0 and p >= 1, got mu = {}, p = {}", self.mu, self.p));
        }
        if let SgmSteps::Geometric { c, q } = self.sgm {
            if !(c > 0.0 && q > 0.0 && q < 1.0) {
                bad.push(format!("sgm steps need c > 0 and q in (0, 1), got c = {c}, q = {q}"));
            }
        }
        if self.calib_samples == 0 {
            bad.push("calib_samples must be >= 1".into());
        }
        if let Some(r) = self.calib_radius {
            if !(r > 0.0) {
                bad.push(format!("calib_radius must be > 0, got {r}"));
            }
        }
        if self.schedule == ScheduleMode::Growth && self.f_star.or(self.known_f_star()).is_none() {
            bad.push("growth schedule needs fstar".into());
        }
        match self.experiment {
            Experiment::Median if self.space != Space::Spd => {
                bad.push("the median experiment runs on spd".into())
            }
            Experiment::Denoise => {
                if self.dim != 2 {
                    bad.push(format!("denoise signals live on H_2, got dim = {}", self.dim));
                }
                if self.n_points < 2 {
                    bad.push("denoise needs n_points >= 2".into());
                }
            }
            Experiment::Toy => match (self.toy, self.space) {
                (ToyKind::L1, Space::Euclidean) => {}
                (ToyKind::L1, _) => bad.push("the l1 toy runs on euclidean".into()),
                (ToyKind::Sharp, Space::HyperbolicProduct) => {
                    bad.push("the sharp toy needs euclidean, hyperbolic or spd".into())
                }
                _ => {}
            },
            _ => {}
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(BenchError::Validation(bad))
        }
    }
}

/// `key = value` pairs with their line numbers. `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(BenchError::Parse {
                context: format!("line {}", i + 1),
                msg: format!("expected `key = value`, got {line:?}"),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(BenchError::Parse {
                context: format!("line {}", i + 1),
                msg: "empty key".into(),
            });
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Builds a validated config from optional file text and flag overrides
/// (applied after the file, so flags win).
pub fn parse_config(
    experiment: Experiment,
    file_text: Option<&str>,
    flags: &[(String, String)],
) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::defaults(experiment);
    if let Some(text) = file_text {
        for (line, k, v) in parse_pairs(text)? {
            cfg.apply(&k, &v).map_err(|msg| BenchError::Parse {
                context: format!("line {line}"),
                msg,
            })?;
        }
    }
    for (k, v) in flags {
        cfg.apply(k, v).map_err(|msg| BenchError::Parse {
            context: format!("flag --{}", k.replace('_', "-")),
            msg,
        })?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Like [`parse_config`] with the file read from `path`.
pub fn load_config(
    experiment: Experiment,
    path: Option<&Path>,
    flags: &[(String, String)],
) -> Result<ExperimentConfig> {
    let text = match path {
        Some(p) => Some(std::fs::read_to_string(p).map_err(|e| BenchError::io(p, e))?),
        None => None,
    };
    parse_config(experiment, text.as_deref(), flags)
}

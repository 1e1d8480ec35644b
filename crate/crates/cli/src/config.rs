//! Flat key-value run configuration with dotted section keys.
//!
//! Grammar: one `key = value` pair per line, `#` starts a comment, blank lines
//! ignored. Lists (centers, windows) are space-separated. Unknown keys are
//! rejected so typos fail loudly instead of silently using a default.

use std::collections::BTreeMap;
use std::path::PathBuf;

use dampwave::nonlinear::{EvolveConfig, NonlinearKind, Nonlinearity};
use dampwave::rates::{theorem_rate_table, ModelId};
use dampwave::GridSpec;

#[derive(Debug)]
pub enum ConfigError {
    Parse(String),
    Validation(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Validation(m) => write!(f, "config validation error: {m}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Linear,
    SemilinearU,
    SemilinearQ,
    SemilinearUtPlusU,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Linear => "linear",
            Model::SemilinearU => "semilinear_u",
            Model::SemilinearQ => "semilinear_q",
            Model::SemilinearUtPlusU => "semilinear_ut_plus_u",
        }
    }

    pub fn nonlinear_kind(&self) -> NonlinearKind {
        match self {
            Model::Linear => NonlinearKind::None,
            Model::SemilinearU => NonlinearKind::AbsPowerU,
            Model::SemilinearQ => NonlinearKind::AbsPowerQ,
            Model::SemilinearUtPlusU => NonlinearKind::AbsPowerUtPlusU,
        }
    }

    /// Rate-table id; the conjectured `|u_t + u|^p` variant is predicted to
    /// behave like `|u|^p`.
    pub fn rate_model_id(&self) -> Option<ModelId> {
        match self {
            Model::Linear => Some(ModelId::Linear),
            Model::SemilinearU | Model::SemilinearUtPlusU => Some(ModelId::SemilinearU),
            Model::SemilinearQ => Some(ModelId::SemilinearQ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub model: Model,
    pub p: Option<f64>,
    pub amplitude: f64,
    pub width: f64,
    pub center: Vec<f64>,
    pub mean_zero: bool,
    pub u0_zero: bool,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub check_rates: bool,
    pub check_identities: bool,
    pub rates_window: Option<(f64, f64)>,
    pub rates_tolerance: f64,
    pub rates_exp_tolerance: f64,
    pub blowup_threshold: f64,
    pub picard_max_iters: usize,
    pub picard_tol: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
}

fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            ConfigError::Parse(format!("line {}: expected 'key = value', got '{raw}'", lineno + 1))
        })?;
        let key = key.trim().to_string();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(ConfigError::Parse(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(map)
}

struct Reader {
    map: BTreeMap<String, String>,
    used: std::collections::BTreeSet<String>,
}

impl Reader {
    fn get(&mut self, key: &str) -> Option<String> {
        self.used.insert(key.to_string());
        self.map.get(key).cloned()
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|_| {
                ConfigError::Parse(format!("key '{key}': cannot parse '{v}'"))
            }),
        }
    }

    fn require<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, ConfigError> {
        self.parse(key)?
            .ok_or_else(|| ConfigError::Parse(format!("missing required key '{key}'")))
    }

    fn finish(self) -> Result<(), ConfigError> {
        let unknown: Vec<String> =
            self.map.keys().filter(|k| !self.used.contains(*k)).cloned().collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Parse(format!("unknown keys: {}", unknown.join(", "))))
        }
    }
}

impl RunConfig {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut r = Reader { map: parse_pairs(text)?, used: Default::default() };

        let dim: usize = r.require("grid.dim")?;
        let points: usize = r.require("grid.points")?;
        let half_length: f64 = r.require("grid.half_length")?;
        let sigma: f64 = r.require("grid.sigma")?;
        let grid = GridSpec::new(dim, points, half_length, sigma)
            .map_err(|e| ConfigError::Validation(e.to_string()))?;

        let model = match r.require::<String>("model")?.as_str() {
            "linear" => Model::Linear,
            "semilinear_u" => Model::SemilinearU,
            "semilinear_q" => Model::SemilinearQ,
            "semilinear_ut_plus_u" => Model::SemilinearUtPlusU,
            other => {
                return Err(ConfigError::Validation(format!(
                    "unknown model '{other}'; expected linear, semilinear_u, semilinear_q \
                     or semilinear_ut_plus_u"
                )))
            }
        };
        let p: Option<f64> = r.parse("p")?;

        if let Some(shape) = r.get("data.shape") {
            if shape != "gaussian" {
                return Err(ConfigError::Validation(format!(
                    "unsupported data shape '{shape}'; only 'gaussian' is available"
                )));
            }
        }
        let amplitude: f64 = r.require("data.amplitude")?;
        let width: f64 = r.require("data.width")?;
        let center: Vec<f64> = match r.get("data.center") {
            None => vec![0.0; dim],
            Some(v) => v
                .split_whitespace()
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| ConfigError::Parse(format!("data.center: cannot parse '{v}'")))?,
        };
        let mean_zero: bool = r.parse("data.mean_zero")?.unwrap_or(false);
        let u0_zero: bool = r.parse("u0_zero")?.unwrap_or(true);

        let dt: f64 = r.require("time.dt")?;
        let t_end: f64 = r.require("time.t_end")?;
        let sample_every: usize = r.parse("time.sample_every")?.unwrap_or(1);

        let checks = r.get("checks").unwrap_or_default();
        let mut check_rates = false;
        let mut check_identities = false;
        for word in checks.split_whitespace() {
            match word {
                "rates" => check_rates = true,
                "identities" => check_identities = true,
                other => {
                    return Err(ConfigError::Validation(format!(
                        "unknown check '{other}'; expected 'rates' and/or 'identities'"
                    )))
                }
            }
        }

        let rates_window = match r.get("rates.window") {
            None => None,
            Some(v) => {
                let parts: Vec<f64> = v
                    .split_whitespace()
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| ConfigError::Parse(format!("rates.window: cannot parse '{v}'")))?;
                if parts.len() != 2 || parts[0] >= parts[1] {
                    return Err(ConfigError::Validation(
                        "rates.window needs two increasing values".into(),
                    ));
                }
                Some((parts[0], parts[1]))
            }
        };
        let rates_tolerance: f64 = r.parse("rates.tolerance")?.unwrap_or(0.15);
        let rates_exp_tolerance: f64 = r.parse("rates.exp_tolerance")?.unwrap_or(0.02);

        let blowup_threshold: f64 = r.parse("blowup.threshold")?.unwrap_or(1e8);
        let picard_max_iters: usize = r.parse("picard.max_iters")?.unwrap_or(25);
        let picard_tol: f64 = r.parse("picard.tol")?.unwrap_or(1e-8);
        let seed: u64 = r.parse("seed")?.unwrap_or(0);
        let output_dir =
            PathBuf::from(r.get("output.dir").unwrap_or_else(|| "out".to_string()));

        r.finish()?;

        let config = Self {
            grid,
            model,
            p,
            amplitude,
            width,
            center,
            mean_zero,
            u0_zero,
            dt,
            t_end,
            sample_every,
            check_rates,
            check_identities,
            rates_window,
            rates_tolerance,
            rates_exp_tolerance,
            blowup_threshold,
            picard_max_iters,
            picard_tol,
            seed,
            output_dir,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.center.len() != self.grid.dim() {
            return Err(ConfigError::Validation(format!(
                "data.center has {} entries for a {}-dimensional grid",
                self.center.len(),
                self.grid.dim()
            )));
        }
        if self.amplitude.is_nan() || self.amplitude <= 0.0 {
            return Err(ConfigError::Validation(format!(
                "data.amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        // at least 6 points per e-folding of the bump
        let per_efold = self.width * std::f64::consts::SQRT_2 / self.grid.spacing();
        if per_efold < 6.0 {
            return Err(ConfigError::Validation(format!(
                "data.width {} gives {per_efold:.2} grid points per e-folding; need at least 6 \
                 (refine the grid or widen the bump)",
                self.width
            )));
        }
        if self.dt.is_nan() || self.dt <= 0.0 || self.t_end <= 0.0 || self.dt > self.t_end {
            return Err(ConfigError::Validation(format!(
                "need 0 < time.dt <= time.t_end, got dt = {}, t_end = {}",
                self.dt, self.t_end
            )));
        }
        if self.sample_every == 0 {
            return Err(ConfigError::Validation("time.sample_every must be >= 1".into()));
        }
        // model/exponent consistency runs through the same gate as the rate table
        if let Some(id) = self.model.rate_model_id() {
            if id != ModelId::Linear {
                let p = self.p.ok_or_else(|| {
                    ConfigError::Validation(format!(
                        "model {} needs an exponent key 'p'",
                        self.model.as_str()
                    ))
                })?;
                theorem_rate_table(self.grid.dim(), self.grid.sigma(), Some(p), id)
                    .map_err(|e| ConfigError::Validation(e.to_string()))?;
            }
        }
        Ok(())
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        match self.model {
            Model::Linear => Nonlinearity::none(),
            _ => Nonlinearity::new(self.model.nonlinear_kind(), self.p.unwrap())
                .expect("validated"),
        }
    }

    pub fn evolve_config(&self) -> EvolveConfig {
        EvolveConfig {
            dt: self.dt,
            t_end: self.t_end,
            blowup_threshold: self.blowup_threshold,
            picard_max_iters: self.picard_max_iters,
            picard_tol: self.picard_tol,
        }
    }
}

/// Parameters for the `check-inequalities` subcommand, one check per file.
#[derive(Debug, Clone)]
pub enum InequalityParams {
    Fgn { grid: GridSpec, q: f64, s: f64, trials: usize, seed: u64, output_dir: PathBuf },
    PolyConvolution { a: f64, b: f64, t_max: f64, output_dir: PathBuf },
    ExpConvolution { c: f64, alpha: f64, t_max: f64, output_dir: PathBuf },
}

impl InequalityParams {
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        let mut r = Reader { map: parse_pairs(text)?, used: Default::default() };
        let kind: String = r.require("check")?;
        let output_dir = PathBuf::from(r.get("output.dir").unwrap_or_else(|| "out".to_string()));
        let parsed = match kind.as_str() {
            "fgn" => {
                let dim: usize = r.require("grid.dim")?;
                let points: usize = r.require("grid.points")?;
                let half_length: f64 = r.require("grid.half_length")?;
                let sigma: f64 = r.require("grid.sigma")?;
                let grid = GridSpec::new(dim, points, half_length, sigma)
                    .map_err(|e| ConfigError::Validation(e.to_string()))?;
                InequalityParams::Fgn {
                    grid,
                    q: r.require("fgn.q")?,
                    s: r.require("fgn.s")?,
                    trials: r.parse("fgn.trials")?.unwrap_or(1000),
                    seed: r.parse("seed")?.unwrap_or(0),
                    output_dir,
                }
            }
            "poly_convolution" => InequalityParams::PolyConvolution {
                a: r.require("a")?,
                b: r.require("b")?,
                t_max: r.require("t_max")?,
                output_dir,
            },
            "exp_convolution" => InequalityParams::ExpConvolution {
                c: r.require("c")?,
                alpha: r.require("alpha")?,
                t_max: r.require("t_max")?,
                output_dir,
            },
            other => {
                return Err(ConfigError::Validation(format!(
                    "unknown check '{other}'; expected fgn, poly_convolution or exp_convolution"
                )))
            }
        };
        r.finish()?;
        Ok(parsed)
    }

    pub fn output_dir(&self) -> &PathBuf {
        match self {
            InequalityParams::Fgn { output_dir, .. } => output_dir,
            InequalityParams::PolyConvolution { output_dir, .. } => output_dir,
            InequalityParams::ExpConvolution { output_dir, .. } => output_dir,
        }
    }
}

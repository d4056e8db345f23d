//! Scenario configuration: defaults, TOML files and command-line overrides.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use holosim_core::precoding::DEFAULT_NS_ITERATIONS;
use holosim_core::{ArrayGeometry, Scheme};
use serde::Deserialize;

use crate::error::ConfigError;

pub const DEFAULT_USERS: usize = 3;
pub const DEFAULT_TRIALS: usize = 800;
pub const DEFAULT_SEED: u64 = 42;

/// Patch grid of one surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArraySpec {
    pub n_h: usize,
    pub n_v: usize,
    /// Patch spacing in wavelengths.
    pub spacing: f64,
}

impl ArraySpec {
    pub fn new(n_h: usize, n_v: usize, spacing: f64) -> Self {
        Self { n_h, n_v, spacing }
    }

    /// Near-square grid holding exactly `count` patches: `n_v` is the
    /// largest divisor not above `sqrt(count)`.
    pub fn from_count(count: usize, spacing: f64) -> Self {
        let (n_h, n_v) = grid_shape(count);
        Self { n_h, n_v, spacing }
    }

    pub fn count(&self) -> usize {
        self.n_h * self.n_v
    }

    /// Scales the patch count by `factor`, keeping the aspect ratio: each
    /// side is multiplied by `sqrt(factor)` and rounded.
    pub fn scaled(&self, factor: f64) -> Self {
        let k = factor.sqrt();
        let side = |n: usize| ((n as f64 * k).round() as usize).max(1);
        Self {
            n_h: side(self.n_h),
            n_v: side(self.n_v),
            spacing: self.spacing,
        }
    }

    pub fn geometry(&self) -> holosim_core::Result<ArrayGeometry> {
        ArrayGeometry::new(self.n_h, self.n_v, self.spacing)
    }
}

pub fn grid_shape(count: usize) -> (usize, usize) {
    if count == 0 {
        return (0, 0);
    }
    let mut n_v = (count as f64).sqrt().floor() as usize;
    while n_v > 1 && !count.is_multiple_of(n_v) {
        n_v -= 1;
    }
    (count / n_v, n_v)
}

/// Fully resolved scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub tx: ArraySpec,
    pub rx: ArraySpec,
    pub users: usize,
    pub snr_grid_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub ns_iterations: usize,
    pub output_path: Option<PathBuf>,
    /// Patch-count factor applied to both surfaces.
    pub scale: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            tx: ArraySpec::new(30, 30, 1.0 / 3.0),
            rx: ArraySpec::new(12, 12, 1.0 / 3.0),
            users: DEFAULT_USERS,
            snr_grid_db: snr_range(-10.0, 30.0, 5.0),
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            schemes: vec![Scheme::Mrt, Scheme::Zf, Scheme::Mmse],
            ns_iterations: DEFAULT_NS_ITERATIONS,
            output_path: None,
            scale: 1.0,
        }
    }
}

impl ScenarioConfig {
    /// Transmit surface after scaling.
    pub fn tx_array(&self) -> ArraySpec {
        self.tx.scaled(self.scale)
    }

    /// Receive surface of one user after scaling.
    pub fn rx_array(&self) -> ArraySpec {
        self.rx.scaled(self.scale)
    }

    /// Whether any requested scheme needs `K <= n_s`.
    pub fn needs_zero_forcing(&self) -> bool {
        self.schemes
            .iter()
            .any(|s| matches!(s, Scheme::Zf | Scheme::NsZf { .. }))
    }

    /// Applies a patch on top of this configuration and re-validates.
    pub fn apply(mut self, patch: &ConfigPatch) -> Result<Self, ConfigError> {
        if let Some(s) = &patch.delta_s {
            self.tx.spacing = s.spacing("delta-s")?;
        }
        if let Some(s) = &patch.delta_r {
            self.rx.spacing = s.spacing("delta-r")?;
        }
        if let Some(n) = patch.ns {
            self.tx = ArraySpec::from_count(positive("ns", n)?, self.tx.spacing);
        }
        if let Some(n) = patch.nr {
            self.rx = ArraySpec::from_count(positive("nr", n)?, self.rx.spacing);
        }
        if let Some(m) = patch.users {
            self.users = positive("users", m)?;
        }
        if let Some(snr) = &patch.snr {
            self.snr_grid_db = snr.grid()?;
        }
        if let Some(t) = patch.trials {
            self.trials = positive("trials", t)?;
        }
        if let Some(seed) = patch.seed {
            self.seed = seed;
        }
        if let Some(iters) = patch.iters {
            self.ns_iterations = positive("iters", iters)?;
            for s in &mut self.schemes {
                if let Scheme::NsZf { iterations } = s {
                    *iterations = iters;
                }
            }
        }
        if let Some(list) = &patch.scheme {
            self.schemes = list
                .iter()
                .map(|s| parse_scheme(s, self.ns_iterations))
                .collect::<Result<_, _>>()?;
        }
        if let Some(out) = &patch.out {
            self.output_path = Some(out.clone());
        }
        if let Some(scale) = patch.scale {
            if !(scale.is_finite() && scale > 0.0) {
                return Err(ConfigError::field("scale", format!("must be a positive number, got {scale}")));
            }
            self.scale = scale;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("users", self.users)?;
        positive("trials", self.trials)?;
        if self.snr_grid_db.is_empty() {
            return Err(ConfigError::field("snr", "grid is empty"));
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ConfigError::field("snr", "grid must be strictly increasing"));
        }
        if self.schemes.is_empty() {
            return Err(ConfigError::field("scheme", "no schemes selected"));
        }
        for (field, a) in [("delta-s", &self.tx), ("delta-r", &self.rx)] {
            if !(a.spacing.is_finite() && a.spacing > 0.0) {
                return Err(ConfigError::field(field, "spacing must be positive"));
            }
        }
        Ok(())
    }

    /// One-line rendering of every setting, used as the CSV header comment
    /// and as the input of [`crate::output::config_hash`].
    pub fn describe(&self) -> String {
        let (tx, rx) = (self.tx_array(), self.rx_array());
        let mut s = String::new();
        let _ = write!(
            s,
            "tx={}x{} delta_s={} rx={}x{} delta_r={} users={} snr={} trials={} seed={} schemes={} iters={} scale={}",
            tx.n_h,
            tx.n_v,
            crate::output::format_number(tx.spacing),
            rx.n_h,
            rx.n_v,
            crate::output::format_number(rx.spacing),
            self.users,
            self.snr_grid_db
                .iter()
                .map(|v| crate::output::format_number(*v))
                .collect::<Vec<_>>()
                .join(";"),
            self.trials,
            self.seed,
            self.schemes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";"),
            self.ns_iterations,
            crate::output::format_number(self.scale),
        );
        if self.scale != 1.0 {
            let _ = write!(s, " native_tx={}x{} native_rx={}x{}", self.tx.n_h, self.tx.n_v, self.rx.n_h, self.rx.n_v);
        }
        s
    }
}

fn positive(field: &'static str, n: usize) -> Result<usize, ConfigError> {
    if n == 0 {
        Err(ConfigError::field(field, "must be at least 1"))
    } else {
        Ok(n)
    }
}

/// A number or a textual literal, as found in TOML files.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Number(f64),
    Text(String),
}

impl Literal {
    fn spacing(&self, field: &'static str) -> Result<f64, ConfigError> {
        let v = match self {
            Literal::Number(v) => *v,
            Literal::Text(s) => parse_spacing(s).map_err(|m| ConfigError::field(field, m))?,
        };
        if v.is_finite() && v > 0.0 {
            Ok(v)
        } else {
            Err(ConfigError::field(field, format!("spacing must be positive, got {v}")))
        }
    }
}

/// SNR grid given either as `a:b:step` or as an explicit list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SnrSpec {
    Range(String),
    List(Vec<f64>),
}

impl SnrSpec {
    fn grid(&self) -> Result<Vec<f64>, ConfigError> {
        match self {
            SnrSpec::Range(s) => parse_snr_range(s).map_err(|m| ConfigError::field("snr", m)),
            SnrSpec::List(v) => Ok(v.clone()),
        }
    }
}

/// Partial configuration. Every field left `None` keeps the value
/// underneath; file and command-line settings use the same type.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigPatch {
    pub ns: Option<usize>,
    pub nr: Option<usize>,
    pub delta_s: Option<Literal>,
    pub delta_r: Option<Literal>,
    pub users: Option<usize>,
    pub snr: Option<SnrSpec>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub scheme: Option<Vec<String>>,
    pub iters: Option<usize>,
    pub out: Option<PathBuf>,
    pub scale: Option<f64>,
}

impl ConfigPatch {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::File(e.message().to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml(&text)
    }

    /// `self` with every field set in `other` replaced.
    pub fn merged(&self, other: &ConfigPatch) -> ConfigPatch {
        ConfigPatch {
            ns: other.ns.or(self.ns),
            nr: other.nr.or(self.nr),
            delta_s: other.delta_s.clone().or_else(|| self.delta_s.clone()),
            delta_r: other.delta_r.clone().or_else(|| self.delta_r.clone()),
            users: other.users.or(self.users),
            snr: other.snr.clone().or_else(|| self.snr.clone()),
            trials: other.trials.or(self.trials),
            seed: other.seed.or(self.seed),
            scheme: other.scheme.clone().or_else(|| self.scheme.clone()),
            iters: other.iters.or(self.iters),
            out: other.out.clone().or_else(|| self.out.clone()),
            scale: other.scale.or(self.scale),
        }
    }
}

/// Defaults, then the optional file, then the flags.
pub fn parse_config(file: Option<&Path>, flags: &ConfigPatch) -> Result<ScenarioConfig, ConfigError> {
    let base = match file {
        Some(p) => ConfigPatch::from_file(p)?,
        None => ConfigPatch::default(),
    };
    ScenarioConfig::default().apply(&base.merged(flags))
}

/// Spacing in wavelengths. Accepts `1/6`, `1/6λ`, `λ/6`, `0.25` and
/// `0.25lambda`.
pub fn parse_spacing(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let bad = || format!("expected a spacing such as 1/3, λ/3 or 0.5, got {text:?}");
    if let Some(den) = t.strip_prefix("λ/").or_else(|| t.strip_prefix("lambda/")) {
        let d: f64 = den.trim().parse().map_err(|_| bad())?;
        return Ok(1.0 / d);
    }
    let t = t
        .strip_suffix('λ')
        .or_else(|| t.strip_suffix("lambda"))
        .unwrap_or(t)
        .trim();
    let value = match t.split_once('/') {
        Some((num, den)) => {
            let n: f64 = num.trim().parse().map_err(|_| bad())?;
            let d: f64 = den.trim().parse().map_err(|_| bad())?;
            n / d
        }
        None => t.parse().map_err(|_| bad())?,
    };
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(bad())
    }
}

/// `a:b:step` with both ends included, or a single value.
pub fn parse_snr_range(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("{s:?} is not a number"))
    };
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if step <= 0.0 {
                return Err("step must be positive".into());
            }
            if b < a {
                return Err(format!("range end {b} is below its start {a}"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * step).collect())
        }
        _ => Err(format!("expected a:b:step, got {text:?}")),
    }
}

pub fn snr_range(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| a + i as f64 * step).collect()
}

/// `mrt`, `zf`, `mmse`, `ns-zf` (using `iterations`) or `ns-zf-<n>`.
pub fn parse_scheme(text: &str, iterations: usize) -> Result<Scheme, ConfigError> {
    let t = text.trim().to_ascii_lowercase().replace('_', "-");
    let scheme = match t.as_str() {
        "mrt" => Scheme::Mrt,
        "zf" => Scheme::Zf,
        "mmse" => Scheme::Mmse,
        "ns-zf" | "nszf" | "ns" => Scheme::NsZf { iterations },
        other => {
            let n = other
                .strip_prefix("ns-zf-")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n > 0)
                .ok_or_else(|| ConfigError::field("scheme", format!("unknown scheme {text:?}")))?;
            Scheme::NsZf { iterations: n }
        }
    };
    Ok(scheme)
}

/// Splits a comma-separated scheme list.
pub fn split_list(text: &str) -> Vec<String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

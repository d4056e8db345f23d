//! Builds the channel statistics of a scenario and turns results into tables.

use holosim_core::channel::CorrelationSpectrum;
use holosim_core::rate::{simulate_trial, theory_curve, SeAccumulator, Theory, TrialOutcome};
use holosim_core::{correlation_eigenvalues, derive_seed, separable_sigma, variance_map, Scheme, SeResult, SeparableSigma, VarianceMap};
use rayon::prelude::*;

use crate::config::ScenarioConfig;
use crate::error::ConfigError;
use crate::output::{format_number, Table};

/// Variance maps and the stacked sigma of a resolved configuration.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub tx_map: VarianceMap,
    pub rx_map: VarianceMap,
    pub sigma: SeparableSigma,
}

impl Scenario {
    /// Fails with [`ConfigError::Infeasible`] when a zero-forcing scheme is
    /// requested and `M n_r > n_s`.
    pub fn build(config: &ScenarioConfig) -> Result<Self, ConfigError> {
        let tx_map = variance_map(&config.tx_array().geometry()?)?;
        let rx_map = variance_map(&config.rx_array().geometry()?)?;
        let sigma = separable_sigma(&rx_map, &tx_map, config.users)?;
        if config.needs_zero_forcing() && sigma.streams() > sigma.tx_harmonics() {
            return Err(ConfigError::Infeasible {
                users: config.users,
                per_user: sigma.per_user_rows(),
                streams: sigma.streams(),
                harmonics: sigma.tx_harmonics(),
            });
        }
        Ok(Self {
            config: config.clone(),
            tx_map,
            rx_map,
            sigma,
        })
    }

    pub fn spectrum(&self) -> CorrelationSpectrum {
        correlation_eigenvalues(&self.rx_map, &self.tx_map)
    }

    pub fn simulate(&self, scheme: Scheme) -> holosim_core::Result<SeResult> {
        simulate_parallel(&self.sigma, scheme, &self.config.snr_grid_db, self.config.trials, self.config.seed)
    }
}

/// Same draws and result as [`holosim_core::simulated_se`], with trials
/// spread over the rayon pool and reduced in trial order.
pub fn simulate_parallel(
    sigma: &SeparableSigma,
    scheme: Scheme,
    snr_grid_db: &[f64],
    trials: usize,
    seed: u64,
) -> holosim_core::Result<SeResult> {
    if trials == 0 {
        return Err(holosim_core::Error::InvalidArgument("at least one trial is required"));
    }
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|t| simulate_trial(sigma, scheme, snr_grid_db, derive_seed(seed, t as u64)))
        .collect::<holosim_core::Result<_>>()?;
    let mut acc = SeAccumulator::new(sigma.streams(), snr_grid_db.len());
    for o in &outcomes {
        acc.push(o);
    }
    Ok(acc.finish(scheme, snr_grid_db, sigma.per_user_rows()))
}

pub fn variance_table(config: &str, map: &VarianceMap) -> Table {
    let mut t = Table::new(config, &["lx", "ly", "raw", "sigma"]);
    for ((lx, ly), (raw, sigma)) in map
        .lattice()
        .cells()
        .iter()
        .zip(map.raw().iter().zip(map.normalized_sigma()))
    {
        t.push(vec![lx.to_string(), ly.to_string(), format_number(*raw), format_number(*sigma)]);
    }
    t
}

/// Nonzero per-user eigenvalues, normalized to the largest, rank from 1.
pub fn eigen_table(config: &str, spectrum: &CorrelationSpectrum) -> Table {
    let mut t = Table::new(config, &["rank", "eigenvalue"]);
    for (i, e) in spectrum.normalized().iter().take(spectrum.rank()).enumerate() {
        t.push(vec![(i + 1).to_string(), format_number(*e)]);
    }
    t
}

pub const SE_COLUMNS: [&str; 6] = ["snr_db", "scheme", "user", "stream", "se_bits", "stderr"];

/// One row per stream and SNR point, then a `sum` row per SNR point.
pub fn push_simulated(t: &mut Table, result: &SeResult) {
    let label = result.scheme.to_string();
    for (s, &db) in result.snr_grid_db.iter().enumerate() {
        for i in 0..result.streams() {
            let (user, stream) = result.stream_label(i);
            t.push(vec![
                format_number(db),
                label.clone(),
                user.to_string(),
                stream.to_string(),
                format_number(result.per_stream[(i, s)]),
                format_number(result.per_stream_stderr[(i, s)]),
            ]);
        }
        t.push(vec![
            format_number(db),
            label.clone(),
            "all".into(),
            "sum".into(),
            format_number(result.sum_se[s]),
            format_number(result.sum_stderr[s]),
        ]);
    }
}

pub fn theory_label(theory: Theory) -> &'static str {
    match theory {
        Theory::MrtBound => "mrt-bound",
        Theory::Zf => "zf-theory",
    }
}

/// Closed form that describes `scheme`, if there is one.
pub fn theory_for(scheme: Scheme) -> Option<Theory> {
    match scheme {
        Scheme::Mrt => Some(Theory::MrtBound),
        Scheme::Zf => Some(Theory::Zf),
        _ => None,
    }
}

pub fn push_theory(t: &mut Table, sigma: &SeparableSigma, theory: Theory, grid: &[f64]) -> holosim_core::Result<()> {
    let curve = theory_curve(sigma, theory, grid)?;
    let rows = sigma.per_user_rows();
    for (s, &db) in grid.iter().enumerate() {
        for i in 0..curve.nrows() {
            t.push(vec![
                format_number(db),
                theory_label(theory).into(),
                (i / rows).to_string(),
                (i % rows).to_string(),
                format_number(curve[(i, s)]),
                String::new(),
            ]);
        }
        t.push(vec![
            format_number(db),
            theory_label(theory).into(),
            "all".into(),
            "sum".into(),
            format_number(curve.column(s).sum()),
            String::new(),
        ]);
    }
    Ok(())
}

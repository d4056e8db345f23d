//! Single-scenario subcommands. Each returns a finished table.

use holosim_core::{correlation_eigenvalues, variance_map, Scheme};

use crate::config::ScenarioConfig;
use crate::error::ConfigError;
use crate::experiment::{eigen_table, push_simulated, push_theory, theory_for, variance_table, Scenario, SE_COLUMNS};
use crate::output::Table;
use crate::preset::FIG8_ITERATIONS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    Transmit,
    Receive,
}

pub fn variance_map_table(config: &ScenarioConfig, surface: Surface) -> Result<Table, ConfigError> {
    let array = match surface {
        Surface::Transmit => config.tx_array(),
        Surface::Receive => config.rx_array(),
    };
    let map = variance_map(&array.geometry()?)?;
    let side = if surface == Surface::Transmit { "tx" } else { "rx" };
    Ok(variance_table(&format!("surface={side} {}", config.describe()), &map))
}

pub fn eigvals_table(config: &ScenarioConfig) -> Result<Table, ConfigError> {
    let tx = variance_map(&config.tx_array().geometry()?)?;
    let rx = variance_map(&config.rx_array().geometry()?)?;
    let spectrum = correlation_eigenvalues(&rx, &tx);
    let header = format!("padded_dimension={} {}", spectrum.eigenvalues().len(), config.describe());
    Ok(eigen_table(&header, &spectrum))
}

/// Simulated SE of every configured scheme, plus warnings for schemes that
/// needed redraws in more than 1% of trials.
pub fn se_sim_table(config: &ScenarioConfig) -> Result<(Table, Vec<String>), ConfigError> {
    let scenario = Scenario::build(config)?;
    let mut t = Table::new(config.describe(), &SE_COLUMNS);
    let mut warnings = Vec::new();
    for &scheme in &config.schemes {
        let r = scenario.simulate(scheme)?;
        if r.rejections_notable() {
            warnings.push(format!(
                "{scheme}: {} singular draws were replaced ({:.1}% of trials)",
                r.rejections,
                100.0 * r.rejection_rate()
            ));
        }
        push_simulated(&mut t, &r);
    }
    Ok((t, warnings))
}

/// Closed forms for the configured schemes that have one (MRT, ZF).
pub fn se_theory_table(config: &ScenarioConfig) -> Result<Table, ConfigError> {
    let theories: Vec<_> = config.schemes.iter().filter_map(|&s| theory_for(s)).collect();
    if theories.is_empty() {
        return Err(ConfigError::field("scheme", "closed forms exist only for mrt and zf"));
    }
    let scenario = Scenario::build(config)?;
    let mut t = Table::new(config.describe(), &SE_COLUMNS);
    for theory in theories {
        push_theory(&mut t, &scenario.sigma, theory, &config.snr_grid_db)?;
    }
    Ok(t)
}

/// Exact ZF next to Neumann-series ZF, at `iterations` or at the default
/// comparison depths.
pub fn ns_compare_table(config: &ScenarioConfig, iterations: Option<usize>) -> Result<(Table, Vec<String>), ConfigError> {
    let mut c = config.clone();
    c.schemes = vec![Scheme::Zf];
    match iterations {
        Some(n) => c.schemes.push(Scheme::NsZf { iterations: n }),
        None => c.schemes.extend(FIG8_ITERATIONS.map(|iterations| Scheme::NsZf { iterations })),
    }
    se_sim_table(&c)
}

//! Named experiment presets. Each writes one CSV per series.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use holosim_core::rate::Theory;
use holosim_core::Scheme;

use crate::config::{ArraySpec, ConfigPatch, ScenarioConfig};
use crate::error::ConfigError;
use crate::experiment::{eigen_table, push_simulated, push_theory, Scenario, SE_COLUMNS};
use crate::output::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Per-user correlation eigenvalues for three receive spacings.
    Fig3,
    /// ZF against its closed form for growing transmit surfaces.
    Fig4,
    /// MRT against its lower bound for growing transmit surfaces.
    Fig5,
    /// MRT, ZF and MMSE for growing receive surfaces.
    Fig6,
    /// Single user, two transmit spacings at a fixed patch count.
    Fig7,
    /// Exact ZF against Neumann-series ZF.
    Fig8,
}

pub const ALL_PRESETS: [Preset; 6] = [Preset::Fig3, Preset::Fig4, Preset::Fig5, Preset::Fig6, Preset::Fig7, Preset::Fig8];

impl FromStr for Preset {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "fig3" => Preset::Fig3,
            "fig4" => Preset::Fig4,
            "fig5" => Preset::Fig5,
            "fig6" => Preset::Fig6,
            "fig7" => Preset::Fig7,
            "fig8" => Preset::Fig8,
            _ => return Err(ConfigError::UnknownPreset(s.to_string())),
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = match self {
            Preset::Fig3 => 3,
            Preset::Fig4 => 4,
            Preset::Fig5 => 5,
            Preset::Fig6 => 6,
            Preset::Fig7 => 7,
            Preset::Fig8 => 8,
        };
        write!(f, "fig{n}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SeriesKind {
    Eigenvalues,
    SpectralEfficiency { theories: Vec<Theory> },
}

/// One output file of a preset.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub config: ScenarioConfig,
    pub kind: SeriesKind,
}

impl Series {
    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn describe(&self) -> String {
        format!("series={} {}", self.name, self.config.describe())
    }

    pub fn run(&self) -> Result<Table, ConfigError> {
        let scenario = Scenario::build(&self.config)?;
        let header = self.describe();
        match &self.kind {
            SeriesKind::Eigenvalues => Ok(eigen_table(&header, &scenario.spectrum())),
            SeriesKind::SpectralEfficiency { theories } => {
                let mut t = Table::new(header, &SE_COLUMNS);
                for &scheme in &self.config.schemes {
                    push_simulated(&mut t, &scenario.simulate(scheme)?);
                }
                for &theory in theories {
                    push_theory(&mut t, &scenario.sigma, theory, &self.config.snr_grid_db)?;
                }
                Ok(t)
            }
        }
    }
}

const THIRD: f64 = 1.0 / 3.0;
const SIXTH: f64 = 1.0 / 6.0;

/// Neumann depths compared against exact ZF.
pub const FIG8_ITERATIONS: [usize; 4] = [2, 3, 4, 7];

fn spacing_tag(spacing: f64) -> String {
    let den = 1.0 / spacing;
    if (den - den.round()).abs() < 1e-9 {
        format!("1-{}", den.round() as u64)
    } else {
        crate::output::format_number(spacing).replace('.', "p")
    }
}

impl Preset {
    /// Paper-scale baseline before user overrides.
    pub fn baseline(&self) -> ScenarioConfig {
        let mut c = ScenarioConfig::default();
        match self {
            Preset::Fig3 => {
                c.tx = ArraySpec::new(30, 30, THIRD);
                c.rx = ArraySpec::new(24, 24, THIRD);
                c.schemes = vec![Scheme::Mrt];
            }
            Preset::Fig4 => {
                c.tx = ArraySpec::new(30, 30, THIRD);
                c.rx = ArraySpec::new(12, 12, THIRD);
                c.schemes = vec![Scheme::Zf, Scheme::Mmse];
            }
            Preset::Fig5 => {
                c.tx = ArraySpec::new(30, 30, THIRD);
                c.rx = ArraySpec::new(12, 12, THIRD);
                c.schemes = vec![Scheme::Mrt];
            }
            Preset::Fig6 => {
                c.tx = ArraySpec::new(30, 30, SIXTH);
                c.rx = ArraySpec::new(12, 12, SIXTH);
                c.schemes = vec![Scheme::Mrt, Scheme::Zf, Scheme::Mmse];
            }
            Preset::Fig7 => {
                c.tx = ArraySpec::new(60, 60, SIXTH);
                c.rx = ArraySpec::new(12, 12, THIRD);
                c.users = 1;
                c.schemes = vec![Scheme::Mrt, Scheme::Zf, Scheme::Mmse];
            }
            Preset::Fig8 => {
                c.tx = ArraySpec::new(27, 27, THIRD);
                c.rx = ArraySpec::new(12, 12, THIRD);
                c.schemes = vec![Scheme::Zf];
                c.schemes.extend(FIG8_ITERATIONS.map(|iterations| Scheme::NsZf { iterations }));
            }
        }
        c
    }

    /// Baseline, then `overrides`, then the swept parameter of each series.
    pub fn series(&self, overrides: &ConfigPatch) -> Result<Vec<Series>, ConfigError> {
        let base = self.baseline().apply(overrides)?;
        let name = self.to_string();
        let se = |theories: Vec<Theory>| SeriesKind::SpectralEfficiency { theories };
        let mut out = Vec::new();
        match self {
            Preset::Fig3 => {
                for d in [SIXTH, THIRD, 0.5] {
                    let mut c = base.clone();
                    c.rx.spacing = d;
                    out.push((format!("{name}_dr_{}", spacing_tag(d)), c, SeriesKind::Eigenvalues));
                }
            }
            Preset::Fig4 | Preset::Fig5 => {
                let counts = if *self == Preset::Fig4 { [576, 900, 1296] } else { [144, 576, 900] };
                let theory = if *self == Preset::Fig4 { Theory::Zf } else { Theory::MrtBound };
                for n in counts {
                    let mut c = base.clone();
                    c.tx = ArraySpec::from_count(n, c.tx.spacing);
                    out.push((format!("{name}_ns_{n}"), c, se(vec![theory])));
                }
            }
            Preset::Fig6 => {
                for n in [72, 144, 288] {
                    let mut c = base.clone();
                    c.rx = ArraySpec::from_count(n, c.rx.spacing);
                    out.push((format!("{name}_nr_{n}"), c, se(vec![])));
                }
            }
            Preset::Fig7 => {
                for d in [SIXTH, 1.0 / 15.0] {
                    let mut c = base.clone();
                    c.tx.spacing = d;
                    out.push((format!("{name}_ds_{}", spacing_tag(d)), c, se(vec![Theory::MrtBound, Theory::Zf])));
                }
            }
            Preset::Fig8 => out.push((name, base, se(vec![]))),
        }
        Ok(out
            .into_iter()
            .map(|(name, config, kind)| Series { name, config, kind })
            .collect())
    }
}

/// Runs every series of `preset` and writes the CSV files into `dir`.
pub fn run_preset(preset: Preset, overrides: &ConfigPatch, dir: &Path) -> Result<Vec<PathBuf>, anyhow::Error> {
    let mut written = Vec::new();
    for series in preset.series(overrides)? {
        let table = series.run()?;
        let path = dir.join(series.file_name());
        table.save(&path)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig3_series() {
        let s = Preset::Fig3.series(&ConfigPatch::default()).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].name, "fig3_dr_1-6");
        for series in &s {
            assert_eq!(series.config.tx, ArraySpec::new(30, 30, THIRD));
            assert_eq!(series.config.rx.count(), 576);
        }
        assert_eq!(s[2].config.rx.spacing, 0.5);
    }

    #[test]
    fn fig6_grids() {
        let s = Preset::Fig6.series(&ConfigPatch::default()).unwrap();
        let counts: Vec<usize> = s.iter().map(|x| x.config.rx.count()).collect();
        assert_eq!(counts, vec![72, 144, 288]);
        assert!(s.iter().all(|x| x.config.tx.spacing == SIXTH && x.config.rx.spacing == SIXTH));
    }

    #[test]
    fn fig8_compares_neumann_iterations() {
        let s = Preset::Fig8.series(&ConfigPatch::default()).unwrap();
        let labels: Vec<String> = s[0].config.schemes.iter().map(|x| x.to_string()).collect();
        assert_eq!(labels, ["zf", "ns-zf-2", "ns-zf-3", "ns-zf-4", "ns-zf-7"]);
    }

    #[test]
    fn scale_is_recorded_in_header() {
        let patch = ConfigPatch {
            scale: Some(0.25),
            ..Default::default()
        };
        let s = Preset::Fig7.series(&patch).unwrap();
        let tx = s[0].config.tx_array();
        assert_eq!((tx.n_h, tx.n_v), (30, 30));
        let header = s[0].describe();
        assert!(header.contains("scale=0.25") && header.contains("native_tx=60x60"), "{header}");
    }

    #[test]
    fn names_round_trip() {
        for p in ALL_PRESETS {
            assert_eq!(p.to_string().parse::<Preset>().unwrap(), p);
        }
        assert!("fig9".parse::<Preset>().is_err());
    }
}

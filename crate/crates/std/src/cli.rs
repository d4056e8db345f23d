//! Command-line front end.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use crate::commands::{self, Surface};
use crate::config::{split_list, Literal, SnrSpec};
use crate::{parse_config, run_preset, ConfigPatch, Preset, ScenarioConfig, Table};

#[derive(Parser, Debug)]
#[command(name = "holosim", version, about = "Holographic MIMO channel and precoding experiments")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Per-harmonic variances of one surface.
    VarianceMap {
        #[arg(long, value_enum, default_value_t = SideArg::Tx)]
        side: SideArg,
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Per-user correlation eigenvalues, normalized to the largest.
    Eigvals {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Monte Carlo spectral efficiency.
    SeSim {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Closed-form spectral efficiency (MRT bound, ZF).
    SeTheory {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Exact ZF against Neumann-series ZF.
    NsCompare {
        #[command(flatten)]
        args: ScenarioArgs,
    },
    /// Run a named experiment; `--out` is a directory.
    Preset {
        name: String,
        #[command(flatten)]
        args: ScenarioArgs,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Tx,
    Rx,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ScenarioArgs {
    /// TOML file with the same keys as the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Transmit patch count.
    #[arg(long)]
    ns: Option<usize>,
    /// Receive patch count per user.
    #[arg(long)]
    nr: Option<usize>,
    /// Transmit spacing in wavelengths, e.g. 1/3 or λ/3.
    #[arg(long)]
    delta_s: Option<String>,
    #[arg(long)]
    delta_r: Option<String>,
    #[arg(long)]
    users: Option<usize>,
    /// a:b:step in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated: mrt, zf, mmse, ns-zf, ns-zf-<n>.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Patch-count factor for both surfaces.
    #[arg(long)]
    scale: Option<f64>,
}

impl ScenarioArgs {
    fn patch(&self) -> ConfigPatch {
        ConfigPatch {
            ns: self.ns,
            nr: self.nr,
            delta_s: self.delta_s.clone().map(Literal::Text),
            delta_r: self.delta_r.clone().map(Literal::Text),
            users: self.users,
            snr: self.snr.clone().map(SnrSpec::Range),
            trials: self.trials,
            seed: self.seed,
            scheme: self.scheme.as_deref().map(split_list),
            iters: self.iters,
            out: self.out.clone(),
            scale: self.scale,
        }
    }

    fn resolve(&self) -> anyhow::Result<ScenarioConfig> {
        Ok(parse_config(self.config.as_deref(), &self.patch())?)
    }
}

fn emit(table: &Table, out: Option<&Path>, stdout: &mut dyn Write) -> anyhow::Result<()> {
    match out {
        Some(path) => table.save(path).with_context(|| format!("writing {}", path.display())),
        None => {
            table.write_to(&mut *stdout)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn warn(warnings: &[String], stderr: &mut dyn Write) -> std::io::Result<()> {
    for w in warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    Ok(())
}

/// Executes one parsed command. Tables without `--out` go to `stdout`;
/// warnings and progress go to `stderr`.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> anyhow::Result<()> {
    match cli.command {
        Command::VarianceMap { side, args } => {
            let c = args.resolve()?;
            let surface = match side {
                SideArg::Tx => Surface::Transmit,
                SideArg::Rx => Surface::Receive,
            };
            emit(&commands::variance_map_table(&c, surface)?, c.output_path.as_deref(), stdout)
        }
        Command::Eigvals { args } => {
            let c = args.resolve()?;
            emit(&commands::eigvals_table(&c)?, c.output_path.as_deref(), stdout)
        }
        Command::SeSim { args } => {
            let c = args.resolve()?;
            let (table, warnings) = commands::se_sim_table(&c)?;
            warn(&warnings, stderr)?;
            emit(&table, c.output_path.as_deref(), stdout)
        }
        Command::SeTheory { args } => {
            let c = args.resolve()?;
            emit(&commands::se_theory_table(&c)?, c.output_path.as_deref(), stdout)
        }
        Command::NsCompare { args } => {
            let c = args.resolve()?;
            let (table, warnings) = commands::ns_compare_table(&c, args.iters)?;
            warn(&warnings, stderr)?;
            emit(&table, c.output_path.as_deref(), stdout)
        }
        Command::Preset { name, args } => {
            let preset: Preset = name.parse()?;
            let file = match &args.config {
                Some(p) => ConfigPatch::from_file(p)?,
                None => ConfigPatch::default(),
            };
            let patch = file.merged(&args.patch());
            let dir = patch.out.clone().unwrap_or_else(|| PathBuf::from("results"));
            for path in run_preset(preset, &patch, &dir)? {
                writeln!(stderr, "wrote {}", path.display())?;
            }
            Ok(())
        }
    }
}

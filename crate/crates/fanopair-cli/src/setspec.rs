//! Parameter-set selection shared by the non-figure subcommands.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use fanopair::dynamics::Model;
use fanopair::params::{raw_from_config, RawParams};
use fanopair::presets::CaptionSet;
use fanopair::spectra::EnergyGrid;

/// Where the physical parameters come from: a `key = value` file (raw or
/// caption-style keys) or caption-style flags for two identical atoms.
/// Flags and a file are mutually exclusive; without either, the resonant
/// `q = 1, gamma = 1, Omega = 1` base set is used.
#[derive(Debug, Args)]
pub struct SetSpec {
    /// Parameter file (`key = value`; complex values as `re,im`)
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Coulomb damping of both atoms
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Dipole-dipole continuum damping of both atoms
    #[arg(long)]
    pub gammabar: Option<f64>,
    /// Fano asymmetry of both atoms
    #[arg(long)]
    pub q: Option<f64>,
    /// Pump scale
    #[arg(long)]
    pub omega: Option<f64>,
    /// Bound-bound dipole-dipole coupling
    #[arg(long)]
    pub j_ab: Option<f64>,
}

impl SetSpec {
    pub fn caption_flags_used(&self) -> bool {
        self.gamma.is_some()
            || self.gammabar.is_some()
            || self.q.is_some()
            || self.omega.is_some()
            || self.j_ab.is_some()
    }

    pub fn resolve(&self) -> Result<RawParams> {
        if let Some(path) = &self.config {
            if self.caption_flags_used() {
                bail!("--config and caption-style flags are mutually exclusive");
            }
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            return Ok(raw_from_config(&text)?);
        }
        let mut set = CaptionSet::base_comparable();
        if let Some(g) = self.gamma {
            set.gamma = g;
        }
        if let Some(g) = self.gammabar {
            set.gammabar = g;
        }
        if let Some(q) = self.q {
            set.q = q;
        }
        if let Some(o) = self.omega {
            set.omega = o;
        }
        if let Some(j) = self.j_ab {
            set.j_ab = j;
        }
        Ok(set.raw()?)
    }
}

/// Grid overrides shared by all subcommands. `--grid-span` is a literal
/// span factor in total dampings; without it the resolution-aware preset
/// grid is used.
#[derive(Debug, Args)]
pub struct GridSpec {
    /// Grid points per axis
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Half-width per axis in units of the total damping (overrides the
    /// resolution-aware default)
    #[arg(long)]
    pub grid_span: Option<f64>,
}

impl GridSpec {
    pub fn build(&self, model: &Model, default_points: usize) -> Result<EnergyGrid> {
        let points = self.grid_points.unwrap_or(default_points);
        let grid = match self.grid_span {
            Some(span) => EnergyGrid::for_model(model, points, span)?,
            None => EnergyGrid::preset_for_model(model, points)?,
        };
        Ok(grid)
    }
}

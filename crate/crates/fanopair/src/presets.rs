//! Named working points of the model, one per published figure panel.
//!
//! Caption-style presets specify two identical atoms through `gamma`,
//! `gammabar`, `q`, the pump scale `Omega`, and the bound-bound coupling
//! `J_ab`, all on resonance (`E_a0 = E_b0 = E_L = 1`). Molecular presets
//! specify raw constants directly and sweep either the direct dipole or the
//! pump amplitude.

use crate::dynamics::Model;
use crate::params::{realize_raw, FanoParams, RawParams, ScaleHints};
use crate::smallmat::cr;
use crate::{Error, Result};

/// Caption-level parameter set for two identical atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaptionSet {
    pub gamma: f64,
    pub gammabar: f64,
    pub q: f64,
    pub omega: f64,
    pub j_ab: f64,
}

impl CaptionSet {
    pub const fn new(gamma: f64, gammabar: f64, q: f64, omega: f64, j_ab: f64) -> Self {
        Self { gamma, gammabar, q, omega, j_ab }
    }

    /// Base set shared by the comparable-path figures:
    /// `q = 1, gamma = 1, Omega = 1, m = 1`, resonant pump.
    pub const fn base_comparable() -> Self {
        Self::new(1.0, 0.0, 1.0, 1.0, 0.0)
    }

    /// Base set of the dominant-indirect-path figures:
    /// `q = 100, gamma = 1, Omega = 3`.
    pub const fn base_indirect() -> Self {
        Self::new(1.0, 0.0, 100.0, 3.0, 0.0)
    }

    pub fn with_gammabar(mut self, gammabar: f64) -> Self {
        self.gammabar = gammabar;
        self
    }

    pub fn with_j_ab(mut self, j_ab: f64) -> Self {
        self.j_ab = j_ab;
        self
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn raw(&self) -> Result<RawParams> {
        realize_raw(
            &FanoParams::symmetric(self.gamma, self.gammabar, self.q, self.omega),
            &ScaleHints { j_ab: cr(self.j_ab), ..Default::default() },
        )
    }

    pub fn model(&self) -> Result<Model> {
        Model::new(self.raw()?)
    }

    /// Total damping of either (identical) atom.
    pub fn gamma_total(&self) -> f64 {
        self.gamma + self.gammabar
    }
}

/// Which caption parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Gammabar,
    JAb,
    Q,
    Omega,
}

impl SweepParam {
    pub fn apply(self, mut set: CaptionSet, value: f64) -> CaptionSet {
        match self {
            SweepParam::Gammabar => set.gammabar = value,
            SweepParam::JAb => set.j_ab = value,
            SweepParam::Q => set.q = value,
            SweepParam::Omega => set.omega = value,
        }
        set
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Gammabar => "gammabar",
            SweepParam::JAb => "J_ab",
            SweepParam::Q => "q",
            SweepParam::Omega => "Omega",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "gammabar" | "gammabar_a" | "gammabar_b" => Ok(SweepParam::Gammabar),
            "J_ab" | "j_ab" => Ok(SweepParam::JAb),
            "q" | "q_a" | "q_b" => Ok(SweepParam::Q),
            "Omega" | "omega" => Ok(SweepParam::Omega),
            other => Err(Error::UnknownParameter(other.to_string())),
        }
    }
}

/// Which raw constant a molecular sweep varies (both atoms together).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MolecularParam {
    DirectDipole,
    PumpAmplitude,
}

impl MolecularParam {
    pub fn apply(self, mut raw: RawParams, value: f64) -> RawParams {
        match self {
            MolecularParam::DirectDipole => {
                raw.mut_a = cr(value);
                raw.mut_b = cr(value);
            }
            MolecularParam::PumpAmplitude => raw.alpha_l = cr(value),
        }
        raw
    }

    pub fn name(self) -> &'static str {
        match self {
            MolecularParam::DirectDipole => "mut",
            MolecularParam::PumpAmplitude => "alpha_L",
        }
    }
}

/// Raw constants typical of molecular condensates: excitation energies near
/// 1, Coulomb configuration couplings two orders below, dipole-dipole
/// couplings weaker still.
pub fn molecular_base() -> RawParams {
    RawParams {
        e_a0: 1.0,
        e_b0: 1.0,
        e_l: 1.0,
        mu_a: cr(0.001),
        mu_b: cr(0.001),
        mut_a: cr(0.02),
        mut_b: cr(0.02),
        v_a: cr(0.01),
        v_b: cr(0.01),
        j_a: cr(0.0),
        j_b: cr(0.0),
        j_ab: cr(0.0),
        alpha_l: cr(1.0),
    }
}

/// What a preset computes and emits.
#[derive(Debug, Clone)]
pub enum Figure {
    /// Family of marginal spectra, one column per variant.
    Marginals { variants: Vec<(String, CaptionSet)>, points: usize, span_factor: f64 },
    /// Joint intensity map.
    JointMap { set: CaptionSet, points: usize, span_factor: f64 },
    /// Negativity and covariance along one caption parameter.
    Sweep { base: CaptionSet, param: SweepParam, values: Vec<f64>, points: usize },
    /// Negativity over a (gammabar, J_ab) lattice.
    Lattice { base: CaptionSet, gammabars: Vec<f64>, j_abs: Vec<f64>, points: usize },
    /// Two-sided filtered-negativity map with the captioned unfiltered value.
    FilteredMap {
        set: CaptionSet,
        half_window: f64,
        expected_n: Option<(f64, f64)>,
        points: usize,
        map_points: usize,
        map_extent: f64,
        win_points: usize,
    },
    /// One-sided filtered-negativity trace over the `a` energy.
    FilteredTrace {
        set: CaptionSet,
        half_window: f64,
        expected_n: Option<(f64, f64)>,
        points: usize,
        trace_points: usize,
        trace_extent: f64,
        win_points: usize,
    },
    /// Negativity and covariance along a raw molecular parameter.
    Molecular { base: RawParams, param: MolecularParam, values: Vec<f64>, points: usize },
}

/// A named, self-contained reproduction recipe.
#[derive(Debug, Clone)]
pub struct FigurePreset {
    pub id: &'static str,
    pub description: &'static str,
    pub figure: Figure,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn logspace(lo_exp: f64, hi_exp: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 10f64.powf(lo_exp + (hi_exp - lo_exp) * k as f64 / (n - 1) as f64))
        .collect()
}

/// All figure presets in publication order.
pub fn all() -> Vec<FigurePreset> {
    let base = CaptionSet::base_comparable();
    let indirect = CaptionSet::base_indirect();
    vec![
        FigurePreset {
            id: "fig2a",
            description: "marginal spectra vs continuum dipole-dipole damping",
            figure: Figure::Marginals {
                variants: [0.0, 0.1, 1.0]
                    .iter()
                    .map(|&gb| (format!("gammabar={gb}"), base.with_gammabar(gb)))
                    .collect(),
                points: 513,
                span_factor: 12.0,
            },
        },
        FigurePreset {
            id: "fig2b",
            description: "marginal spectra vs bound-bound dipole-dipole coupling",
            figure: Figure::Marginals {
                variants: [0.0, 0.56, 1.0, 1.68]
                    .iter()
                    .map(|&j| (format!("J_ab={j}"), base.with_j_ab(j)))
                    .collect(),
                points: 513,
                span_factor: 12.0,
            },
        },
        FigurePreset {
            id: "fig3a",
            description: "joint spectrum, independent atoms",
            figure: Figure::JointMap { set: base, points: 257, span_factor: 12.0 },
        },
        FigurePreset {
            id: "fig3b",
            description: "joint spectrum, continuum coupling gammabar = 1",
            figure: Figure::JointMap {
                set: base.with_gammabar(1.0),
                points: 257,
                span_factor: 12.0,
            },
        },
        FigurePreset {
            id: "fig3c",
            description: "joint spectrum, bound-bound coupling J_ab = 1.68",
            figure: Figure::JointMap { set: base.with_j_ab(1.68), points: 257, span_factor: 12.0 },
        },
        FigurePreset {
            id: "fig4a",
            description: "channel competition at gammabar = 1 for increasing J_ab",
            figure: Figure::Marginals {
                variants: [0.56, 2.0, 4.0]
                    .iter()
                    .map(|&j| (format!("J_ab={j}"), base.with_gammabar(1.0).with_j_ab(j)))
                    .collect(),
                points: 513,
                span_factor: 12.0,
            },
        },
        FigurePreset {
            id: "fig4b",
            description: "channel competition at strong pump Omega = 5",
            figure: Figure::Marginals {
                variants: vec![
                    ("uncoupled".to_string(), base.with_omega(5.0)),
                    ("gammabar=1".to_string(), base.with_omega(5.0).with_gammabar(1.0)),
                    (
                        "balanced J_ab=2".to_string(),
                        base.with_omega(5.0).with_gammabar(1.0).with_j_ab(2.0),
                    ),
                ],
                points: 513,
                span_factor: 12.0,
            },
        },
        FigurePreset {
            id: "fig5",
            description: "pump-split marginals of the dominant indirect path",
            figure: Figure::Marginals {
                variants: vec![
                    ("uncoupled".to_string(), indirect),
                    ("gammabar=1".to_string(), indirect.with_gammabar(1.0)),
                    ("J_ab=0.56".to_string(), indirect.with_j_ab(0.56)),
                ],
                points: 513,
                span_factor: 12.0,
            },
        },
        FigurePreset {
            id: "fig6a",
            description: "joint spectrum of the split doublet, independent atoms",
            figure: Figure::JointMap { set: indirect, points: 257, span_factor: 12.0 },
        },
        FigurePreset {
            id: "fig6b",
            description: "joint spectrum of the split doublet, gammabar = 1",
            figure: Figure::JointMap {
                set: indirect.with_gammabar(1.0),
                points: 257,
                span_factor: 12.0,
            },
        },
        FigurePreset {
            id: "fig7a",
            description: "negativity and covariance vs continuum coupling",
            figure: Figure::Sweep {
                base,
                param: SweepParam::Gammabar,
                values: vec![0.0, 0.1, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0],
                points: 257,
            },
        },
        FigurePreset {
            id: "fig7b",
            description: "negativity and covariance vs bound-bound coupling",
            figure: Figure::Sweep {
                base,
                param: SweepParam::JAb,
                values: vec![0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.68],
                points: 257,
            },
        },
        FigurePreset {
            id: "fig8",
            description: "negativity over the coupling plane",
            figure: Figure::Lattice {
                base,
                gammabars: vec![0.0, 0.5, 1.0, 1.5, 2.0],
                j_abs: vec![0.0, 0.42, 0.84, 1.26, 1.68],
                points: 257,
            },
        },
        FigurePreset {
            id: "fig9a",
            description: "filtered-negativity map at gammabar = 1 (N = 0.98)",
            figure: Figure::FilteredMap {
                set: base.with_gammabar(1.0),
                half_window: 0.005,
                expected_n: Some((0.98, 0.03)),
                points: 513,
                map_points: 61,
                map_extent: 3.0,
                win_points: 9,
            },
        },
        FigurePreset {
            id: "fig9b",
            description: "filtered-negativity map at J_ab = 1.68 (N = 1.79)",
            figure: Figure::FilteredMap {
                set: base.with_j_ab(1.68),
                half_window: 0.01,
                expected_n: Some((1.79, 0.03)),
                points: 513,
                map_points: 61,
                map_extent: 3.0,
                win_points: 9,
            },
        },
        FigurePreset {
            id: "fig10",
            description: "one-sided filtered negativity across the spectrum",
            figure: Figure::FilteredTrace {
                set: base.with_j_ab(1.68),
                half_window: 0.01,
                expected_n: Some((1.79, 0.03)),
                points: 257,
                trace_points: 161,
                trace_extent: 3.0,
                win_points: 9,
            },
        },
        FigurePreset {
            id: "fig11a",
            description: "molecular condensate: negativity vs direct dipole, continuum channel",
            figure: Figure::Molecular {
                base: {
                    let mut raw = molecular_base();
                    raw.j_a = cr(0.001);
                    raw.j_b = cr(0.001);
                    raw
                },
                param: MolecularParam::DirectDipole,
                values: linspace(0.005, 0.1, 20),
                points: 257,
            },
        },
        FigurePreset {
            id: "fig11b",
            description: "molecular condensate: negativity vs direct dipole, bound-bound channel",
            figure: Figure::Molecular {
                base: {
                    let mut raw = molecular_base();
                    raw.j_ab = cr(0.001);
                    raw
                },
                param: MolecularParam::DirectDipole,
                values: linspace(0.005, 0.1, 20),
                points: 257,
            },
        },
        FigurePreset {
            id: "fig12",
            description: "molecular condensate: negativity vs pump amplitude",
            figure: Figure::Molecular {
                base: {
                    let mut raw = molecular_base();
                    raw.j_ab = cr(2e-4);
                    raw
                },
                param: MolecularParam::PumpAmplitude,
                values: logspace(-1.5, 1.0, 21),
                points: 257,
            },
        },
    ]
}

pub fn by_id(id: &str) -> Result<FigurePreset> {
    all()
        .into_iter()
        .find(|p| p.id == id)
        .ok_or_else(|| Error::UnknownPreset(id.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::derive_fano;
    use approx::assert_relative_eq;

    #[test]
    fn every_preset_realizes_a_valid_model() {
        for preset in all() {
            match &preset.figure {
                Figure::Marginals { variants, .. } => {
                    for (_, set) in variants {
                        set.model().unwrap_or_else(|e| panic!("{}: {e}", preset.id));
                    }
                }
                Figure::JointMap { set, .. } => {
                    set.model().unwrap();
                }
                Figure::Sweep { base, param, values, .. } => {
                    for &v in values {
                        param.apply(*base, v).model().unwrap();
                    }
                }
                Figure::Lattice { base, gammabars, j_abs, .. } => {
                    for &gb in gammabars {
                        for &j in j_abs {
                            base.with_gammabar(gb).with_j_ab(j).model().unwrap();
                        }
                    }
                }
                Figure::FilteredMap { set, .. } | Figure::FilteredTrace { set, .. } => {
                    set.model().unwrap();
                }
                Figure::Molecular { base, param, values, .. } => {
                    for &v in values {
                        Model::new(param.apply(*base, v)).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn caption_parameters_round_trip() {
        // the realized raw constants reproduce the caption values
        let set = CaptionSet::base_comparable().with_gammabar(1.0).with_j_ab(1.68);
        let raw = set.raw().unwrap();
        let fano = derive_fano(&raw);
        assert_relative_eq!(fano.gamma_a, 1.0, max_relative = 1e-12);
        assert_relative_eq!(fano.gammabar_b, 1.0, max_relative = 1e-12);
        assert_relative_eq!(fano.q_a.unwrap().re, 1.0, max_relative = 1e-12);
        assert_relative_eq!(fano.pump_avg.unwrap().norm(), 1.0, max_relative = 1e-12);
        assert_eq!(raw.j_ab, cr(1.68));
        assert_eq!(raw.e_l, 1.0);
    }

    #[test]
    fn unknown_preset_is_an_error() {
        assert!(matches!(by_id("fig99"), Err(Error::UnknownPreset(_))));
        assert_eq!(by_id("fig9a").unwrap().id, "fig9a");
    }
}

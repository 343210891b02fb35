//! Closed-form dynamics of the coupled model.
//!
//! With flat continua the Laplace-domain equations close exactly, and every
//! amplitude is a finite sum over the poles of the resolvent: the four
//! eigenvalues of the effective discrete matrix and the two eigenvalues of
//! each damped 2x2 block. Inverse transforms reduce to divided differences
//! of `exp(-i z t)` over pole triples, which this module evaluates with
//! removable-singularity-safe forms, so exactly coinciding denominators
//! (symmetric atoms) cost no accuracy.
//!
//! The long-time joint amplitude drops the global phase
//! `exp[-i (E_a + E_b - 2 E_L) t]`: it is a product of one local phase per
//! electron, so no observable built here (intensities, moments, Schmidt
//! coefficients, negativities) can depend on it. That makes the stored
//! amplitude time independent.

use crate::matrices::{build_structure, eig2, eig_abar, Eig2, Eig4, ModelMatrices};
use crate::params::{Atom, RawParams, ValidationReport};
use crate::smallmat::*;
use crate::{C64, Error, Result};

use std::f64::consts::PI;

/// A parameter set with everything precomputed for amplitude evaluation.
#[derive(Debug, Clone)]
pub struct Model {
    raw: RawParams,
    mats: ModelMatrices,
    eig_damped_a: Eig2,
    eig_damped_b: Eig2,
    eig_effective: Eig4,
    c0: V4,
    /// `w_k = p_k^{-1} c(0)`.
    weights: V4,
    /// `L_j^b B_a† p_k`: drives the amplitude of an ionized `a` electron.
    vec_a: [[V2; 4]; 2],
    /// `L_j^a B_b† p_k`.
    vec_b: [[V2; 4]; 2],
    /// `I_b† L_j^b B_a† p_k`, paired with poles in the `b` energy.
    num_bpole: [[C64; 4]; 2],
    /// `I_a† L_j^a B_b† p_k`, paired with poles in the `a` energy.
    num_apole: [[C64; 4]; 2],
}

impl Model {
    /// Build the model with both electrons initially in their ground states.
    pub fn new(raw: RawParams) -> Result<Self> {
        Self::with_initial(raw, [ONE, ZERO, ZERO, ZERO])
    }

    /// Build the model with an arbitrary normalized discrete initial state.
    pub fn with_initial(raw: RawParams, c0: V4) -> Result<Self> {
        let report = raw.validate();
        let hard: Vec<&String> = report
            .issues
            .iter()
            .filter(|s| !s.contains("never ionizes"))
            .collect();
        if !hard.is_empty() {
            return Err(Error::InfeasibleParams(format!(
                "invalid raw parameters: {}",
                hard.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("; ")
            )));
        }
        let norm = v4_norm_sq(&c0);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { norm });
        }

        let mats = build_structure(&raw);
        let eig_damped_a = eig2(&mats.damped_a)?;
        let eig_damped_b = eig2(&mats.damped_b)?;
        let eig_effective = eig_abar(&mats.effective)?;

        let mut weights = v4_zero();
        for k in 0..4 {
            let row = eig_effective.left_row(k);
            weights[k] = (0..4).map(|i| row[i] * c0[i]).sum();
        }

        let badj_a = m42_adjoint(&mats.ion_a);
        let badj_b = m42_adjoint(&mats.ion_b);
        let mut vec_a = [[v2_zero(); 4]; 2];
        let mut vec_b = [[v2_zero(); 4]; 2];
        let mut num_bpole = [[ZERO; 4]; 2];
        let mut num_apole = [[ZERO; 4]; 2];
        for k in 0..4 {
            let pk = eig_effective.vector(k);
            let ba_pk = m24_matvec(&badj_a, &pk);
            let bb_pk = m24_matvec(&badj_b, &pk);
            for j in 0..2 {
                vec_a[j][k] = m2_matvec(&eig_damped_b.projectors[j], &ba_pk);
                vec_b[j][k] = m2_matvec(&eig_damped_a.projectors[j], &bb_pk);
                num_bpole[j][k] = v2_dot(&mats.chan_b, &vec_a[j][k]);
                num_apole[j][k] = v2_dot(&mats.chan_a, &vec_b[j][k]);
            }
        }

        // Undamped (real-eigenvalue) modes must carry exactly zero residue
        // for the long-time limit to exist; snap rounding-level numerators
        // to zero so such modes divide out instead of producing 0/0.
        let wscale = weights.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        for w in weights.iter_mut() {
            if w.norm() < 1e-15 * wscale {
                *w = ZERO;
            }
        }
        let nscale = num_bpole
            .iter()
            .chain(num_apole.iter())
            .flatten()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        for arr in [&mut num_bpole, &mut num_apole] {
            for row in arr.iter_mut() {
                for z in row.iter_mut() {
                    if z.norm() < 1e-15 * nscale {
                        *z = ZERO;
                    }
                }
            }
        }

        Ok(Self {
            raw,
            mats,
            eig_damped_a,
            eig_damped_b,
            eig_effective,
            c0,
            weights,
            vec_a,
            vec_b,
            num_bpole,
            num_apole,
        })
    }

    pub fn raw(&self) -> &RawParams {
        &self.raw
    }

    pub fn matrices(&self) -> &ModelMatrices {
        &self.mats
    }

    pub fn validation(&self) -> ValidationReport {
        self.raw.validate()
    }

    /// Eigensystem of the damped block `L_a` / `L_b`.
    pub fn eig_damped(&self, which: Atom) -> &Eig2 {
        match which {
            Atom::A => &self.eig_damped_a,
            Atom::B => &self.eig_damped_b,
        }
    }

    pub fn eig_effective(&self) -> &Eig4 {
        &self.eig_effective
    }

    pub fn initial_state(&self) -> V4 {
        self.c0
    }

    /// Slowest decay rate `min_k |Im Lambda_k|` of the discrete sector.
    pub fn slowest_decay(&self) -> f64 {
        self.eig_effective
            .values
            .iter()
            .map(|l| l.im.abs())
            .fold(f64::INFINITY, f64::min)
    }

    // ------------------------------------------------------- time domain

    /// Discrete-sector amplitudes `c(t)`.
    pub fn coeffs_c(&self, t: f64) -> V4 {
        let mut out = v4_zero();
        for k in 0..4 {
            let phase = (-I * self.eig_effective.values[k] * t).exp();
            let coeff = self.weights[k] * phase;
            let pk = self.eig_effective.vector(k);
            for i in 0..4 {
                out[i] += coeff * pk[i];
            }
        }
        out
    }

    /// Singly-ionized amplitudes `d_j(E, t)` (components pair the ionized
    /// electron with the partner atom's ground / excited state).
    pub fn coeffs_d_atom(&self, which: Atom, e: f64, t: f64) -> V2 {
        let eps = e - self.raw.e_l;
        let (vecs, partner) = match which {
            Atom::A => (&self.vec_a, &self.eig_damped_b),
            Atom::B => (&self.vec_b, &self.eig_damped_a),
        };
        let mut out = v2_zero();
        for j in 0..2 {
            let z1 = cr(eps) - partner.values[j];
            for k in 0..4 {
                let amp = self.weights[k] * dd1(z1, self.eig_effective.values[k], t);
                out[0] += amp * vecs[j][k][0];
                out[1] += amp * vecs[j][k][1];
            }
        }
        out
    }

    /// Joint continuum amplitude `d(E_a, E_b, t)`.
    pub fn coeffs_d_joint(&self, e_a: f64, e_b: f64, t: f64) -> C64 {
        let eps_a = e_a - self.raw.e_l;
        let eps_b = e_b - self.raw.e_l;
        let z0 = cr(eps_a + eps_b);
        let mut out = ZERO;
        for k in 0..4 {
            let z2 = self.eig_effective.values[k];
            for j in 0..2 {
                let z1b = cr(eps_a) - self.eig_damped_b.values[j];
                out += self.num_bpole[j][k] * self.weights[k] * dd2(z0, z1b, z2, t);
                let z1a = cr(eps_b) - self.eig_damped_a.values[j];
                out += self.num_apole[j][k] * self.weights[k] * dd2(z0, z1a, z2, t);
            }
        }
        out
    }

    // -------------------------------------------------- long-time limit

    /// Long-time joint amplitude with the global two-electron phase dropped.
    pub fn longtime_amplitude(&self, e_a: f64, e_b: f64) -> C64 {
        let eps_a = e_a - self.raw.e_l;
        let eps_b = e_b - self.raw.e_l;
        let mut out = ZERO;
        for k in 0..4 {
            let mut brace = ZERO;
            for j in 0..2 {
                if self.num_bpole[j][k] != ZERO {
                    brace += self.num_bpole[j][k] / (cr(eps_b) + self.eig_damped_b.values[j]);
                }
                if self.num_apole[j][k] != ZERO {
                    brace += self.num_apole[j][k] / (cr(eps_a) + self.eig_damped_a.values[j]);
                }
            }
            let num = self.weights[k] * brace;
            if num != ZERO {
                out += num / (cr(eps_a + eps_b) - self.eig_effective.values[k]);
            }
        }
        out
    }

    /// Laplace-domain discrete-sector amplitudes `c(eps)` at a complex
    /// frequency in the upper half-plane, from the resolvent pole form.
    pub fn resolvent_c(&self, eps: C64) -> V4 {
        let mut out = v4_zero();
        for k in 0..4 {
            let coeff = I * self.weights[k] / (eps - self.eig_effective.values[k]);
            let pk = self.eig_effective.vector(k);
            for i in 0..4 {
                out[i] += coeff * pk[i];
            }
        }
        out
    }

    /// Pole sums over the `b` axis reused across rows when sampling a grid:
    /// `out[n][k] = sum_j num_bpole[j][k] / (eps_b[n] + lambda_j^b)`.
    pub fn bpole_sums(&self, axis_b: &[f64]) -> Vec<[C64; 4]> {
        axis_b
            .iter()
            .map(|&e_b| {
                let eps_b = cr(e_b - self.raw.e_l);
                let mut s = [ZERO; 4];
                for (k, sk) in s.iter_mut().enumerate() {
                    for j in 0..2 {
                        if self.num_bpole[j][k] != ZERO {
                            *sk += self.num_bpole[j][k] / (eps_b + self.eig_damped_b.values[j]);
                        }
                    }
                }
                s
            })
            .collect()
    }

    /// One row of the long-time amplitude, `out[n] = d_inf(e_a, axis_b[n])`,
    /// using precomputed [`Model::bpole_sums`].
    pub fn longtime_row(&self, e_a: f64, axis_b: &[f64], bsums: &[[C64; 4]], out: &mut [C64]) {
        let eps_a = e_a - self.raw.e_l;
        let mut apole = [ZERO; 4];
        for (k, ak) in apole.iter_mut().enumerate() {
            for j in 0..2 {
                if self.num_apole[j][k] != ZERO {
                    *ak += self.num_apole[j][k] / (cr(eps_a) + self.eig_damped_a.values[j]);
                }
            }
        }
        for ((&e_b, bs), o) in axis_b.iter().zip(bsums).zip(out.iter_mut()) {
            let z0 = cr(eps_a + e_b - self.raw.e_l);
            let mut acc = ZERO;
            for k in 0..4 {
                let num = self.weights[k] * (bs[k] + apole[k]);
                if num != ZERO {
                    acc += num / (z0 - self.eig_effective.values[k]);
                }
            }
            *o = acc;
        }
    }

    /// Analytic norm of the long-time joint spectrum, evaluated from the
    /// residue double sum. Terms whose pole-pair denominator vanishes are
    /// only admissible with a vanishing numerator; otherwise the
    /// configuration is reported as degenerate.
    pub fn norm_analytic(&self) -> Result<f64> {
        let lam = &self.eig_effective.values;
        let scale: f64 = lam.iter().map(|z| z.norm()).fold(1e-300, f64::max);
        let mut total = ZERO;
        for k in 0..4 {
            for kp in 0..4 {
                let wfac = self.weights[k].conj() * self.weights[kp];
                let denom_k = lam[k].conj() - lam[kp];
                let mut brace = ZERO;
                for (side, eigd) in [
                    (&self.num_bpole, &self.eig_damped_b),
                    (&self.num_apole, &self.eig_damped_a),
                ] {
                    for j in 0..2 {
                        for jp in 0..2 {
                            let num = side[j][k].conj() * side[jp][kp];
                            let denom_l = eigd.values[j].conj() - eigd.values[jp];
                            if denom_l.norm() < 1e-12 * scale.max(1.0) {
                                if num.norm() * wfac.norm() > 1e-20 {
                                    return Err(Error::DegenerateEigenvalues(format!(
                                        "continuum pole pair {} / {} coincides with \
                                         non-vanishing weight",
                                        eigd.values[j].conj(),
                                        eigd.values[jp]
                                    )));
                                }
                                continue;
                            }
                            brace += num / denom_l;
                        }
                    }
                }
                if denom_k.norm() < 1e-12 * scale.max(1.0) {
                    if brace.norm() * wfac.norm() > 1e-20 {
                        return Err(Error::DegenerateEigenvalues(format!(
                            "discrete pole pair {} / {} coincides with non-vanishing weight",
                            lam[k].conj(),
                            lam[kp]
                        )));
                    }
                    continue;
                }
                total += wfac * brace / denom_k;
            }
        }
        let norm = 4.0 * PI * PI * total;
        debug_assert!(
            norm.im.abs() <= 1e-8 * (1.0 + norm.re.abs()),
            "analytic norm should be real, got {norm}"
        );
        Ok(norm.re)
    }
}

/// Total quadrature norm of the state at time `t` over the given axes:
/// discrete + singly-ionized + joint sectors. Unitarity makes this 1 up to
/// grid truncation error.
pub fn total_norm(
    model: &Model,
    axis_a: &[f64],
    wts_a: &[f64],
    axis_b: &[f64],
    wts_b: &[f64],
    t: f64,
) -> f64 {
    use rayon::prelude::*;
    let c = model.coeffs_c(t);
    let mut total = v4_norm_sq(&c);
    let single: f64 = axis_a
        .par_iter()
        .zip(wts_a)
        .map(|(&e, &w)| w * v2_norm_sq(&model.coeffs_d_atom(Atom::A, e, t)))
        .sum::<f64>()
        + axis_b
            .par_iter()
            .zip(wts_b)
            .map(|(&e, &w)| w * v2_norm_sq(&model.coeffs_d_atom(Atom::B, e, t)))
            .sum::<f64>();
    total += single;
    let joint: f64 = axis_a
        .par_iter()
        .zip(wts_a)
        .map(|(&ea, &wa)| {
            let mut row = 0.0;
            for (&eb, &wb) in axis_b.iter().zip(wts_b) {
                row += wb * model.coeffs_d_joint(ea, eb, t).norm_sqr();
            }
            wa * row
        })
        .sum();
    total + joint
}

// -------------------------------------------- divided-difference kernels

/// `phi1(x) = (e^x - 1)/x`, series-expanded near zero.
fn phi1(x: C64) -> C64 {
    if x.norm() < 1e-4 {
        ONE + x * (cr(0.5) + x * (cr(1.0 / 6.0) + x * (cr(1.0 / 24.0) + x * cr(1.0 / 120.0))))
    } else {
        (x.exp() - ONE) / x
    }
}

/// First divided difference of `exp(-i z t)` over two pole nodes; finite and
/// accurate for coinciding nodes. Anchoring on the slower-decaying node
/// keeps the internal exponential bounded for `t >= 0`.
pub(crate) fn dd1(za: C64, zb: C64, t: f64) -> C64 {
    let (za, zb) = if za.im >= zb.im { (za, zb) } else { (zb, za) };
    let x = -I * (zb - za) * t;
    -I * t * (-I * za * t).exp() * phi1(x)
}

/// Second divided difference of `exp(-i z t)` over three pole nodes. The
/// outer division uses the widest node pair, so single near-collisions stay
/// well conditioned; fully clustered nodes fall back to the Taylor value.
pub(crate) fn dd2(z0: C64, z1: C64, z2: C64, t: f64) -> C64 {
    let d01 = (z0 - z1).norm();
    let d02 = (z0 - z2).norm();
    let d12 = (z1 - z2).norm();
    let (a, b, c_, span) = if d02 >= d01 && d02 >= d12 {
        (z0, z1, z2, d02)
    } else if d01 >= d12 {
        (z0, z2, z1, d01)
    } else {
        (z1, z0, z2, d12)
    };
    let scale = 1.0 + z0.norm().max(z1.norm()).max(z2.norm());
    if span * t.abs() < 1e-6 && span < 1e-6 * scale {
        let mean = (z0 + z1 + z2) / 3.0;
        let it = -I * t;
        return it * it * 0.5 * (mean * it).exp();
    }
    (dd1(b, c_, t) - dd1(a, b, t)) / (c_ - a)
}

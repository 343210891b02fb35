//! Dressed-state picture of each auto-ionization system.
//!
//! Diagonalizing the bound-continuum block of one atom dresses its continuum
//! states with the auto-ionizing level. In the dressed basis the optical
//! coupling acquires the classic asymmetric profile
//! `mu_bar(E) = mut (eps + q)/(eps - i)` with `eps = (E - E0)/gamma`, whose
//! zero at `E_F = E0 - gamma q` is the Fano zero of the ionization spectrum.
//! The bound-bound and bound-continuum dipole-dipole channels combine into a
//! dressed inter-atom coupling `Jbar(E_a, E_b)`; requiring it to vanish at
//! the two Fano-zero energies balances the channels and is what produces the
//! deep spectral minimum of the balanced configurations.
//!
//! Flat continua are assumed throughout: the principal-value level shift
//! vanishes, so the dressed resonance energy coincides with the bare one.

use crate::params::{Atom, RawParams};
use crate::smallmat::{cr, I, ONE};
use crate::{C64, Error, Result};

use std::f64::consts::PI;

/// Dressed-basis quantities of the two-atom model.
#[derive(Debug, Clone, Copy)]
pub struct DressedCoupling {
    raw: RawParams,
    pub gamma_a: f64,
    pub gamma_b: f64,
    /// Dressed resonance energies (equal to the bare ones for flat continua).
    pub e0_a: f64,
    pub e0_b: f64,
    pub q_a: C64,
    pub q_b: C64,
    /// Fano-zero energies, defined for real asymmetry parameters.
    pub fano_zero_a: Option<f64>,
    pub fano_zero_b: Option<f64>,
}

/// Build the dressed picture; requires Coulomb damping on both atoms.
pub fn dressed(raw: &RawParams) -> Result<DressedCoupling> {
    let gamma_a = PI * raw.v_a.norm_sqr();
    let gamma_b = PI * raw.v_b.norm_sqr();
    if gamma_a <= 0.0 || gamma_b <= 0.0 {
        return Err(Error::InfeasibleParams(
            "dressed picture needs nonzero Coulomb coupling on both atoms".into(),
        ));
    }
    let q_of = |mu: C64, mu_t: C64, v: C64| -> Result<C64> {
        if mu_t.norm() == 0.0 || v.norm() == 0.0 {
            return Err(Error::DivisionByZeroCoupling { field: "q" });
        }
        Ok(mu / (PI * mu_t * v.conj()))
    };
    let q_a = q_of(raw.mu_a, raw.mut_a, raw.v_a)?;
    let q_b = q_of(raw.mu_b, raw.mut_b, raw.v_b)?;
    let zero_of = |e0: f64, gamma: f64, q: C64| -> Option<f64> {
        (q.im.abs() <= 1e-12 * q.norm().max(1.0)).then_some(e0 - gamma * q.re)
    };
    Ok(DressedCoupling {
        raw: *raw,
        gamma_a,
        gamma_b,
        e0_a: raw.e_a0,
        e0_b: raw.e_b0,
        q_a,
        q_b,
        fano_zero_a: zero_of(raw.e_a0, gamma_a, q_a),
        fano_zero_b: zero_of(raw.e_b0, gamma_b, q_b),
    })
}

impl DressedCoupling {
    fn gamma(&self, which: Atom) -> f64 {
        match which {
            Atom::A => self.gamma_a,
            Atom::B => self.gamma_b,
        }
    }

    fn e0(&self, which: Atom) -> f64 {
        match which {
            Atom::A => self.e0_a,
            Atom::B => self.e0_b,
        }
    }

    /// Reduced detuning `eps = (E - E0)/gamma`.
    pub fn reduced(&self, which: Atom, e: f64) -> f64 {
        (e - self.e0(which)) / self.gamma(which)
    }

    /// Bound-state weight `f(E) = V*/(E - E0 + i gamma)` of a dressed
    /// continuum state; `|f|^2` is a unit-mass Lorentzian.
    pub fn state_weight(&self, which: Atom, e: f64) -> C64 {
        let v = self.raw.atom(which).v;
        v.conj() / C64::new(e - self.e0(which), self.gamma(which))
    }

    /// Dressed optical dipole `mu_bar(E) = mut (eps + q)/(eps - i)`.
    pub fn dipole(&self, which: Atom, e: f64) -> C64 {
        let q = match which {
            Atom::A => self.q_a,
            Atom::B => self.q_b,
        };
        let mu_t = self.raw.atom(which).mu_tilde;
        let eps = cr(self.reduced(which, e));
        mu_t * (eps + q) / (eps - I)
    }

    /// Fano-zero energy, defined only for (numerically) real asymmetry.
    pub fn fano_zero(&self, which: Atom) -> Result<f64> {
        match which {
            Atom::A => self.fano_zero_a,
            Atom::B => self.fano_zero_b,
        }
        .ok_or_else(|| {
            Error::InfeasibleParams(format!(
                "complex asymmetry on atom {}: no real Fano-zero energy",
                which.label()
            ))
        })
    }

    /// Dressed inter-atom coupling `Jbar(E_a, E_b)` in closed form.
    pub fn coupling(&self, e_a: f64, e_b: f64) -> C64 {
        let raw = &self.raw;
        let ea = cr(self.reduced(Atom::A, e_a));
        let eb = cr(self.reduced(Atom::B, e_b));
        let ga = self.gamma_a;
        let gb = self.gamma_b;
        let term_a = raw.j_a.conj() * raw.v_b / (gb * (eb - I));
        let term_b = raw.j_b * raw.v_a.conj() / (ga * (ea + I));
        let mixed = (raw.j_ab * raw.v_a.conj() * raw.v_b - I * raw.j_a.conj() * raw.v_b * ga
            + I * raw.j_b * raw.v_a.conj() * gb)
            / (ga * gb * (ea + I) * (eb - I));
        term_a + term_b + mixed
    }

    /// Dressed inter-atom coupling from the defining basis-change integrals,
    /// evaluated by symmetric principal-value quadrature plus the semicircle
    /// (-i pi) residue of the simple pole. Cross-checks [`Self::coupling`].
    pub fn coupling_quadrature(&self, e_a: f64, e_b: f64, span: f64, points: usize) -> C64 {
        let raw = &self.raw;
        let fa = self.state_weight(Atom::A, e_a);
        let fb_conj = self.state_weight(Atom::B, e_b).conj();
        // integral of the dressed-basis overlap kernel over the partner
        // energy: PV part on a symmetric midpoint grid + semicircle term
        let pv = |center: f64| -> f64 {
            let h = span / points as f64;
            let mut s = 0.0;
            for k in 0..points {
                let x = (k as f64 + 0.5) * h;
                s += h * (1.0 / (center - (center + x)) + 1.0 / (center - (center - x)));
            }
            s
        };
        let g_int_a = raw.v_a * fa * cr(pv(e_a)) - I * PI * raw.v_a * fa + ONE;
        let g_int_b_conj = (raw.v_b * self.state_weight(Atom::B, e_b) * cr(pv(e_b))
            - I * PI * raw.v_b * self.state_weight(Atom::B, e_b)
            + ONE)
            .conj();
        raw.j_ab * fa * fb_conj + raw.j_a.conj() * fb_conj * g_int_a + raw.j_b * fa * g_int_b_conj
    }
}

/// Channel-balance residual `J_a* mu_a*/mut_a* + J_b mu_b/mut_b - J_ab`;
/// zero exactly when the dressed inter-atom coupling vanishes at the two
/// Fano-zero energies.
pub fn balance_residual(raw: &RawParams) -> Result<C64> {
    if raw.mut_a.norm() == 0.0 || raw.mut_b.norm() == 0.0 {
        return Err(Error::ZeroDipole("mut"));
    }
    Ok(raw.j_a.conj() * raw.mu_a.conj() / raw.mut_a.conj() + raw.j_b * raw.mu_b / raw.mut_b
        - raw.j_ab)
}

/// For identical atoms with real couplings, choose the continuum
/// dipole-dipole couplings that balance the channels:
/// `J_a = J_b = (J_ab / 2)(mut_a / mu_a)`.
pub fn balance_solve(raw: &RawParams) -> Result<RawParams> {
    if raw.mu_a.norm() == 0.0 {
        return Err(Error::ZeroDipole("mu_a"));
    }
    let ratio_a = raw.mut_a / raw.mu_a;
    let ratio_b = if raw.mu_b.norm() > 0.0 { raw.mut_b / raw.mu_b } else { ratio_a };
    if (ratio_a - ratio_b).norm() > 1e-10 * ratio_a.norm().max(1.0)
        || ratio_a.im.abs() > 1e-12 * ratio_a.norm().max(1.0)
        || raw.j_ab.im.abs() > 1e-12 * raw.j_ab.norm().max(1.0)
    {
        return Err(Error::InfeasibleParams(
            "channel balancing assumes identical atoms with real couplings".into(),
        ));
    }
    let j = raw.j_ab * ratio_a * 0.5;
    let mut out = *raw;
    out.j_a = j;
    out.j_b = j;
    Ok(out)
}

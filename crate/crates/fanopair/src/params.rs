//! Physical parameter sets and the Fano-style parametrization.
//!
//! The raw constants are the energies, dipole moments and couplings of the
//! two-atom model. For discussing spectra it is more convenient to trade the
//! couplings for damping rates and asymmetry ratios:
//!
//! ```text
//! gamma_j    = pi |V_j|^2            Coulomb damping of continuum j
//! gammabar_j = pi |J_j|^2            dipole-dipole damping of continuum j
//! q_j        = mu_j / (pi mut_j V_j*)        Coulomb-channel asymmetry
//! qbar_a     = mu_b / (pi mut_a J_a*)        cross-channel asymmetry
//! qbar_b     = mu_a / (pi mut_b J_b*)
//! Gamma_j    = gamma_j + gammabar_j
//! Q_j        = (gamma_j q_j + gammabar_j qbar_j) / Gamma_j
//! Omega_j    = sqrt(4 pi Gamma_j) (Q_j + i) mut_j alpha_L
//! m          = mu_b / mu_a,   Omega = (Omega_a + Omega_b)/2
//! ```
//!
//! [`realize_raw`] inverts the parametrization under fixed phase conventions
//! (couplings and direct dipoles real and nonnegative), which is what turns
//! caption-level parameter sets into concrete models.

use crate::smallmat::{cr, I, ONE};
use crate::C64;
use crate::{Error, Result};

use std::f64::consts::PI;

/// Which of the two auto-ionization systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Atom {
    A,
    B,
}

impl Atom {
    pub fn other(self) -> Atom {
        match self {
            Atom::A => Atom::B,
            Atom::B => Atom::A,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Atom::A => "a",
            Atom::B => "b",
        }
    }
}

/// Raw physical constants of the two-atom model (`hbar = 1`).
///
/// `mu_*` couple ground and auto-ionizing bound states to the pump,
/// `mut_*` (the tilded dipoles) are direct bound-to-continuum dipoles,
/// `v_*` are Coulomb configuration couplings, `j_a`/`j_b` dipole-dipole
/// couplings into the continua and `j_ab` the bound-bound dipole-dipole
/// coupling. `alpha_l` is the pump amplitude; only products like
/// `mut_j * alpha_l` enter the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawParams {
    pub e_a0: f64,
    pub e_b0: f64,
    pub e_l: f64,
    pub mu_a: C64,
    pub mu_b: C64,
    pub mut_a: C64,
    pub mut_b: C64,
    pub v_a: C64,
    pub v_b: C64,
    pub j_a: C64,
    pub j_b: C64,
    pub j_ab: C64,
    pub alpha_l: C64,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            e_a0: 1.0,
            e_b0: 1.0,
            e_l: 1.0,
            mu_a: cr(0.0),
            mu_b: cr(0.0),
            mut_a: cr(0.0),
            mut_b: cr(0.0),
            v_a: cr(0.0),
            v_b: cr(0.0),
            j_a: cr(0.0),
            j_b: cr(0.0),
            j_ab: cr(0.0),
            alpha_l: cr(1.0),
        }
    }
}

/// Per-atom view onto [`RawParams`].
#[derive(Debug, Clone, Copy)]
pub struct AtomRaw {
    pub e0: f64,
    pub mu: C64,
    pub mu_tilde: C64,
    pub v: C64,
    pub j: C64,
}

impl RawParams {
    pub fn atom(&self, which: Atom) -> AtomRaw {
        match which {
            Atom::A => AtomRaw {
                e0: self.e_a0,
                mu: self.mu_a,
                mu_tilde: self.mut_a,
                v: self.v_a,
                j: self.j_a,
            },
            Atom::B => AtomRaw {
                e0: self.e_b0,
                mu: self.mu_b,
                mu_tilde: self.mut_b,
                v: self.v_b,
                j: self.j_b,
            },
        }
    }

    pub fn detuning(&self, which: Atom) -> f64 {
        self.atom(which).e0 - self.e_l
    }

    /// True when every dipole-dipole channel vanishes.
    pub fn uncoupled(&self) -> bool {
        self.j_a.norm() == 0.0 && self.j_b.norm() == 0.0 && self.j_ab.norm() == 0.0
    }

    pub fn validate(&self) -> ValidationReport {
        let mut issues = Vec::new();
        let fields: [(&str, C64); 10] = [
            ("mu_a", self.mu_a),
            ("mu_b", self.mu_b),
            ("mut_a", self.mut_a),
            ("mut_b", self.mut_b),
            ("V_a", self.v_a),
            ("V_b", self.v_b),
            ("J_a", self.j_a),
            ("J_b", self.j_b),
            ("J_ab", self.j_ab),
            ("alpha_L", self.alpha_l),
        ];
        for (name, value) in fields {
            if !value.re.is_finite() || !value.im.is_finite() {
                issues.push(format!("{name} is not finite"));
            }
        }
        for (name, value) in [("E_a0", self.e_a0), ("E_b0", self.e_b0), ("E_L", self.e_l)] {
            if !value.is_finite() {
                issues.push(format!("{name} is not finite"));
            }
        }
        if self.e_l <= 0.0 {
            issues.push("E_L must be positive".to_string());
        }
        let drive = self.alpha_l.norm();
        let ionizes = self.v_a.norm() > 0.0
            || self.v_b.norm() > 0.0
            || self.j_a.norm() > 0.0
            || self.j_b.norm() > 0.0
            || (drive > 0.0 && (self.mut_a.norm() > 0.0 || self.mut_b.norm() > 0.0));
        if !ionizes {
            issues.push("model never ionizes: no coupling reaches a continuum".to_string());
        }
        ValidationReport { issues }
    }
}

/// Outcome of [`RawParams::validate`]; empty means the set is usable.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub issues: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Fano-style parametrization. Ratio fields whose defining coupling is zero
/// are `None` ("undefined") rather than NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoParams {
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub gammabar_a: f64,
    pub gammabar_b: f64,
    pub q_a: Option<C64>,
    pub q_b: Option<C64>,
    pub qbar_a: Option<C64>,
    pub qbar_b: Option<C64>,
    /// Total damping `Gamma_j = gamma_j + gammabar_j`.
    pub gamma_tot_a: f64,
    pub gamma_tot_b: f64,
    /// Damping-weighted asymmetry `Q_j`.
    pub q_weighted_a: Option<C64>,
    pub q_weighted_b: Option<C64>,
    /// Complex pump parameters `Omega_j`.
    pub pump_a: Option<C64>,
    pub pump_b: Option<C64>,
    /// Dipole-moment ratio `m = mu_b / mu_a`.
    pub dipole_ratio: Option<C64>,
    /// Average pump parameter `Omega`.
    pub pump_avg: Option<C64>,
    pub de_a0: f64,
    pub de_b0: f64,
}

impl FanoParams {
    /// Caption-style constructor for two identical atoms: both share
    /// `gamma`, `gammabar`, real `q`, zero detuning, `m = 1`, and the pump
    /// scale `omega` (a real magnitude).
    pub fn symmetric(gamma: f64, gammabar: f64, q: f64, omega: f64) -> Self {
        Self {
            gamma_a: gamma,
            gamma_b: gamma,
            gammabar_a: gammabar,
            gammabar_b: gammabar,
            q_a: Some(cr(q)),
            q_b: Some(cr(q)),
            qbar_a: None,
            qbar_b: None,
            gamma_tot_a: gamma + gammabar,
            gamma_tot_b: gamma + gammabar,
            q_weighted_a: None,
            q_weighted_b: None,
            pump_a: None,
            pump_b: None,
            dipole_ratio: Some(ONE),
            pump_avg: Some(cr(omega)),
            de_a0: 0.0,
            de_b0: 0.0,
        }
    }

    pub fn q(&self, which: Atom) -> Result<C64> {
        match which {
            Atom::A => self.q_a.ok_or(Error::DivisionByZeroCoupling { field: "q_a" }),
            Atom::B => self.q_b.ok_or(Error::DivisionByZeroCoupling { field: "q_b" }),
        }
    }

    pub fn qbar(&self, which: Atom) -> Result<C64> {
        match which {
            Atom::A => self
                .qbar_a
                .ok_or(Error::DivisionByZeroCoupling { field: "qbar_a" }),
            Atom::B => self
                .qbar_b
                .ok_or(Error::DivisionByZeroCoupling { field: "qbar_b" }),
        }
    }
}

fn nonzero(z: C64) -> bool {
    z.norm() > 0.0
}

/// Derive the Fano-style parametrization from raw constants.
pub fn derive_fano(raw: &RawParams) -> FanoParams {
    let gamma_a = PI * raw.v_a.norm_sqr();
    let gamma_b = PI * raw.v_b.norm_sqr();
    let gammabar_a = PI * raw.j_a.norm_sqr();
    let gammabar_b = PI * raw.j_b.norm_sqr();
    let gamma_tot_a = gamma_a + gammabar_a;
    let gamma_tot_b = gamma_b + gammabar_b;

    let q_of = |mu: C64, mu_t: C64, v: C64| -> Option<C64> {
        (nonzero(mu_t) && nonzero(v)).then(|| mu / (PI * mu_t * v.conj()))
    };
    let q_a = q_of(raw.mu_a, raw.mut_a, raw.v_a);
    let q_b = q_of(raw.mu_b, raw.mut_b, raw.v_b);
    let qbar_a = (nonzero(raw.mut_a) && nonzero(raw.j_a))
        .then(|| raw.mu_b / (PI * raw.mut_a * raw.j_a.conj()));
    let qbar_b = (nonzero(raw.mut_b) && nonzero(raw.j_b))
        .then(|| raw.mu_a / (PI * raw.mut_b * raw.j_b.conj()));

    // Q_j via gamma_j q_j + gammabar_j qbar_j = (V_j mu_j + J_j mu_other)/mut_j,
    // which stays finite when one channel is absent.
    let q_weighted = |mu_t: C64, v: C64, mu: C64, j: C64, mu_other: C64, g_tot: f64| {
        (nonzero(mu_t) && g_tot > 0.0).then(|| (v * mu + j * mu_other) / (mu_t * g_tot))
    };
    let q_weighted_a = q_weighted(raw.mut_a, raw.v_a, raw.mu_a, raw.j_a, raw.mu_b, gamma_tot_a);
    let q_weighted_b = q_weighted(raw.mut_b, raw.v_b, raw.mu_b, raw.j_b, raw.mu_a, gamma_tot_b);

    // Omega_j = sqrt(4 pi Gamma_j) (Q_j + i) mut_j alpha_L, expanded so the
    // mut_j = 0 limit stays finite.
    let pump = |mu_t: C64, v: C64, mu: C64, j: C64, mu_other: C64, g_tot: f64| -> Option<C64> {
        (g_tot > 0.0).then(|| {
            let weighted = (v * mu + j * mu_other) / g_tot + I * mu_t;
            (4.0 * PI * g_tot).sqrt() * weighted * raw.alpha_l
        })
    };
    let pump_a = pump(raw.mut_a, raw.v_a, raw.mu_a, raw.j_a, raw.mu_b, gamma_tot_a);
    let pump_b = pump(raw.mut_b, raw.v_b, raw.mu_b, raw.j_b, raw.mu_a, gamma_tot_b);

    FanoParams {
        gamma_a,
        gamma_b,
        gammabar_a,
        gammabar_b,
        q_a,
        q_b,
        qbar_a,
        qbar_b,
        gamma_tot_a,
        gamma_tot_b,
        q_weighted_a,
        q_weighted_b,
        pump_a,
        pump_b,
        dipole_ratio: nonzero(raw.mu_a).then(|| raw.mu_b / raw.mu_a),
        pump_avg: match (pump_a, pump_b) {
            (Some(a), Some(b)) => Some((a + b) / 2.0),
            _ => None,
        },
        de_a0: raw.e_a0 - raw.e_l,
        de_b0: raw.e_b0 - raw.e_l,
    }
}

/// Absolute scales that the Fano-style parameters leave free.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleHints {
    pub e_l: f64,
    pub alpha_l: C64,
    pub j_ab: C64,
}

impl Default for ScaleHints {
    fn default() -> Self {
        Self { e_l: 1.0, alpha_l: ONE, j_ab: cr(0.0) }
    }
}

/// Invert the Fano-style parametrization into raw constants.
///
/// Phase conventions: `V_j`, `J_j` and `mut_j alpha_L` are taken real and
/// nonnegative, `mu_j = pi q_j mut_j V_j`, and the caption pump scale is
/// identified with `|Omega_j| = sqrt(4 pi Gamma_j (|Q_j|^2 + 1)) mut_j
/// alpha_L` for each atom. The two resulting direct dipoles must be
/// consistent with the requested ratio `m`; otherwise the combination is
/// rejected.
pub fn realize_raw(fano: &FanoParams, hints: &ScaleHints) -> Result<RawParams> {
    for (name, g) in [
        ("gamma_a", fano.gamma_a),
        ("gamma_b", fano.gamma_b),
        ("gammabar_a", fano.gammabar_a),
        ("gammabar_b", fano.gammabar_b),
    ] {
        if !(g.is_finite() && g >= 0.0) {
            return Err(Error::InfeasibleParams(format!(
                "{name} must be finite and nonnegative, got {g}"
            )));
        }
    }
    let g_tot_a = fano.gamma_a + fano.gammabar_a;
    let g_tot_b = fano.gamma_b + fano.gammabar_b;
    if g_tot_a <= 0.0 || g_tot_b <= 0.0 {
        return Err(Error::InfeasibleParams(
            "total damping Gamma_j must be positive on both atoms".into(),
        ));
    }
    let q_a = fano.q(Atom::A)?;
    let q_b = fano.q(Atom::B)?;
    let m = fano.dipole_ratio.unwrap_or(ONE);
    let omega = fano
        .pump_avg
        .ok_or_else(|| Error::InfeasibleParams("pump scale Omega is required".into()))?
        .norm();

    let v_a = cr((fano.gamma_a / PI).sqrt());
    let v_b = cr((fano.gamma_b / PI).sqrt());
    let j_a = cr((fano.gammabar_a / PI).sqrt());
    let j_b = cr((fano.gammabar_b / PI).sqrt());

    if !nonzero(q_b * v_b) || !nonzero(q_a * v_a) {
        return Err(Error::InfeasibleParams(
            "q_j V_j must be nonzero on both atoms to fix the dipole ratio".into(),
        ));
    }
    // Direct-dipole ratio r = mut_b / mut_a implied by m.
    let r = m * q_a * v_a / (q_b * v_b);
    if r.im.abs() > 1e-12 * r.norm() || r.re <= 0.0 {
        return Err(Error::InfeasibleParams(format!(
            "dipole ratio m = {m} is incompatible with real nonnegative direct dipoles"
        )));
    }
    let q_weighted_a = (fano.gamma_a * q_a + PI * j_a * q_b * v_b * r) / g_tot_a;
    let q_weighted_b = (fano.gamma_b * q_b + PI * j_b * q_a * v_a / r) / g_tot_b;

    let scale_a = omega / (4.0 * PI * g_tot_a * (q_weighted_a.norm_sqr() + 1.0)).sqrt();
    let scale_b = omega / (4.0 * PI * g_tot_b * (q_weighted_b.norm_sqr() + 1.0)).sqrt();
    if omega > 0.0 {
        let got = scale_b / scale_a;
        if (got - r.re).abs() > 1e-9 * (1.0 + r.re) {
            return Err(Error::InfeasibleParams(format!(
                "per-atom pump identification gives mut_b/mut_a = {got:.12}, \
                 but m = {m} demands {:.12}",
                r.re
            )));
        }
    }

    let alpha = hints.alpha_l;
    if omega > 0.0 && !nonzero(alpha) {
        return Err(Error::InfeasibleParams(
            "alpha_L = 0 cannot carry a nonzero pump scale".into(),
        ));
    }
    let mut_a = if nonzero(alpha) { cr(scale_a) / alpha } else { cr(0.0) };
    let mut_b = if nonzero(alpha) { cr(scale_b) / alpha } else { cr(0.0) };
    let mu_a = PI * q_a * mut_a * v_a;
    let mu_b = PI * q_b * mut_b * v_b;

    Ok(RawParams {
        e_a0: hints.e_l + fano.de_a0,
        e_b0: hints.e_l + fano.de_b0,
        e_l: hints.e_l,
        mu_a,
        mu_b,
        mut_a,
        mut_b,
        v_a,
        v_b,
        j_a,
        j_b,
        j_ab: hints.j_ab,
        alpha_l: alpha,
    })
}

// ------------------------------------------------------------ config files

/// Parse a flat `key = value` parameter file into raw constants.
///
/// Raw keys (`E_a0`, `E_b0`, `E_L`, `mu_a`, `mu_b`, `mut_a`, `mut_b`, `V_a`,
/// `V_b`, `J_a`, `J_b`, `J_ab`, `alpha_L`) override [`RawParams::default`].
/// Alternatively Fano-style keys (`gamma_a`, `gamma_b`, `gammabar_a`,
/// `gammabar_b`, `q_a`, `q_b`, `m`, `Omega`, `dE_a0`, `dE_b0`) may be given,
/// optionally with the scale hints `E_L`, `alpha_L`, `J_ab`; these are
/// realized through [`realize_raw`]. Mixing the two styles is rejected.
/// Complex values are written `re,im`; bare reals are accepted.
pub fn raw_from_config(text: &str) -> Result<RawParams> {
    let mut raw_kv: Vec<(String, C64)> = Vec::new();
    let mut fano_kv: Vec<(String, C64)> = Vec::new();
    const RAW_KEYS: [&str; 13] = [
        "E_a0", "E_b0", "E_L", "mu_a", "mu_b", "mut_a", "mut_b", "V_a", "V_b", "J_a", "J_b",
        "J_ab", "alpha_L",
    ];
    const FANO_KEYS: [&str; 10] = [
        "gamma_a",
        "gamma_b",
        "gammabar_a",
        "gammabar_b",
        "q_a",
        "q_b",
        "m",
        "Omega",
        "dE_a0",
        "dE_b0",
    ];
    const HINT_KEYS: [&str; 3] = ["E_L", "alpha_L", "J_ab"];

    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let value = parse_complex(value.trim())
            .ok_or_else(|| Error::InvalidConfig(format!("line {}: bad number", lineno + 1)))?;
        if RAW_KEYS.contains(&key.as_str()) {
            raw_kv.push((key, value));
        } else if FANO_KEYS.contains(&key.as_str()) {
            fano_kv.push((key, value));
        } else {
            return Err(Error::InvalidConfig(format!("unknown key `{key}`")));
        }
    }

    let only_hints = raw_kv
        .iter()
        .all(|(k, _)| HINT_KEYS.contains(&k.as_str()));
    if !fano_kv.is_empty() && !only_hints {
        return Err(Error::InvalidConfig(
            "cannot mix raw couplings with Fano-style keys (except E_L, alpha_L, J_ab)".into(),
        ));
    }

    if fano_kv.is_empty() {
        let mut raw = RawParams::default();
        for (key, value) in raw_kv {
            match key.as_str() {
                "E_a0" => raw.e_a0 = value.re,
                "E_b0" => raw.e_b0 = value.re,
                "E_L" => raw.e_l = value.re,
                "mu_a" => raw.mu_a = value,
                "mu_b" => raw.mu_b = value,
                "mut_a" => raw.mut_a = value,
                "mut_b" => raw.mut_b = value,
                "V_a" => raw.v_a = value,
                "V_b" => raw.v_b = value,
                "J_a" => raw.j_a = value,
                "J_b" => raw.j_b = value,
                "J_ab" => raw.j_ab = value,
                "alpha_L" => raw.alpha_l = value,
                _ => unreachable!(),
            }
        }
        Ok(raw)
    } else {
        let mut fano = FanoParams::symmetric(1.0, 0.0, 1.0, 1.0);
        let mut hints = ScaleHints::default();
        for (key, value) in raw_kv {
            match key.as_str() {
                "E_L" => hints.e_l = value.re,
                "alpha_L" => hints.alpha_l = value,
                "J_ab" => hints.j_ab = value,
                _ => unreachable!(),
            }
        }
        for (key, value) in fano_kv {
            match key.as_str() {
                "gamma_a" => fano.gamma_a = value.re,
                "gamma_b" => fano.gamma_b = value.re,
                "gammabar_a" => fano.gammabar_a = value.re,
                "gammabar_b" => fano.gammabar_b = value.re,
                "q_a" => fano.q_a = Some(value),
                "q_b" => fano.q_b = Some(value),
                "m" => fano.dipole_ratio = Some(value),
                "Omega" => fano.pump_avg = Some(value),
                "dE_a0" => fano.de_a0 = value.re,
                "dE_b0" => fano.de_b0 = value.re,
                _ => unreachable!(),
            }
        }
        fano.gamma_tot_a = fano.gamma_a + fano.gammabar_a;
        fano.gamma_tot_b = fano.gamma_b + fano.gammabar_b;
        realize_raw(&fano, &hints)
    }
}

fn parse_complex(s: &str) -> Option<C64> {
    match s.split_once(',') {
        Some((re, im)) => Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?)),
        None => Some(cr(s.trim().parse().ok()?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn inv_sqrt_pi() -> f64 {
        1.0 / PI.sqrt()
    }

    #[test]
    fn gamma_from_coulomb_coupling() {
        let raw = RawParams { v_a: cr(inv_sqrt_pi()), ..Default::default() };
        let fano = derive_fano(&raw);
        assert_relative_eq!(fano.gamma_a, 1.0, max_relative = 1e-14);
        assert_eq!(fano.gamma_b, 0.0);
    }

    #[test]
    fn zero_dipole_dipole_leaves_qbar_undefined() {
        let raw = RawParams {
            v_a: cr(0.5),
            v_b: cr(0.5),
            mut_a: cr(0.1),
            mut_b: cr(0.1),
            ..Default::default()
        };
        let fano = derive_fano(&raw);
        assert_eq!(fano.gammabar_a, 0.0);
        assert_eq!(fano.gammabar_b, 0.0);
        assert!(fano.qbar_a.is_none());
        assert!(fano.qbar_b.is_none());
        assert!(fano.qbar(Atom::A).is_err());
    }

    #[test]
    fn unit_asymmetry_from_matched_dipoles() {
        // mu = sqrt(pi) mut, V = 1/sqrt(pi), all real -> q = mu/(pi mut V*) = 1
        let mut_a = cr(0.3);
        let raw = RawParams {
            mut_a,
            mu_a: cr(PI.sqrt()) * mut_a,
            v_a: cr(inv_sqrt_pi()),
            ..Default::default()
        };
        let fano = derive_fano(&raw);
        let q = fano.q_a.expect("defined");
        assert_relative_eq!(q.re, 1.0, max_relative = 1e-14);
        assert_relative_eq!(q.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn realize_matches_hand_solution() {
        // gamma=1, gammabar=0, q=1, m=1, Omega=1, zero detuning:
        // V = 1/sqrt(pi), mut alpha = 1/sqrt(8 pi), mu alpha = sqrt(pi) mut alpha.
        let fano = FanoParams::symmetric(1.0, 0.0, 1.0, 1.0);
        let raw = realize_raw(&fano, &ScaleHints::default()).unwrap();
        assert_relative_eq!(raw.v_a.re, inv_sqrt_pi(), max_relative = 1e-14);
        let mut_alpha = (raw.mut_a * raw.alpha_l).re;
        assert_relative_eq!(mut_alpha, 1.0 / (8.0 * PI).sqrt(), max_relative = 1e-12);
        let mu_alpha = (raw.mu_a * raw.alpha_l).re;
        assert_relative_eq!(mu_alpha, PI.sqrt() * mut_alpha, max_relative = 1e-12);
        assert_eq!(raw.j_a, cr(0.0));
    }

    #[test]
    fn realize_dipole_dipole_damping() {
        let fano = FanoParams::symmetric(1.0, 1.0, 1.0, 1.0);
        let raw = realize_raw(&fano, &ScaleHints::default()).unwrap();
        assert_relative_eq!(raw.j_a.re, inv_sqrt_pi(), max_relative = 1e-14);
    }

    #[test]
    fn balanced_case_satisfies_channel_balance() {
        // q=1, gamma=1, gammabar=1, J_ab=2: J_a = (J_ab/2)(mut/mu) = 1/sqrt(pi)
        let fano = FanoParams::symmetric(1.0, 1.0, 1.0, 1.0);
        let hints = ScaleHints { j_ab: cr(2.0), ..Default::default() };
        let raw = realize_raw(&fano, &hints).unwrap();
        let residual = raw.j_a.conj() * raw.mu_a.conj() / raw.mut_a.conj()
            + raw.j_b * raw.mu_b / raw.mut_b
            - raw.j_ab;
        assert!(residual.norm() < 1e-12, "balance residual {residual}");
        assert_relative_eq!(raw.j_a.re, inv_sqrt_pi(), max_relative = 1e-12);
    }

    #[test]
    fn validate_flags_inert_and_bad_sets() {
        let inert = RawParams::default();
        let report = inert.validate();
        assert!(report.issues.iter().any(|s| s.contains("never ionizes")));

        let bad_el = RawParams { e_l: 0.0, v_a: cr(0.5), ..Default::default() };
        assert!(!bad_el.validate().is_ok());

        let fig2 = realize_raw(&FanoParams::symmetric(1.0, 0.0, 1.0, 1.0), &ScaleHints::default())
            .unwrap();
        assert!(fig2.validate().is_ok());
    }

    #[test]
    fn round_trip_identity_on_defined_fields() {
        for (gamma, gammabar, q, omega, jab) in [
            (1.0, 0.0, 1.0, 1.0, 0.0),
            (1.0, 1.0, 1.0, 1.0, 2.0),
            (0.7, 0.3, -2.0, 2.5, 0.56),
            (1.0, 0.0, 100.0, 3.0, 0.0),
            (2.0, 0.5, 0.8, 5.0, 1.68),
        ] {
            let fano = FanoParams::symmetric(gamma, gammabar, q, omega);
            let hints = ScaleHints { j_ab: cr(jab), ..Default::default() };
            let raw = realize_raw(&fano, &hints).unwrap();
            let back = derive_fano(&raw);
            assert_relative_eq!(back.gamma_a, gamma, max_relative = 1e-12);
            assert_relative_eq!(back.gammabar_a, gammabar, max_relative = 1e-12);
            let qb = back.q_a.unwrap();
            assert_relative_eq!(qb.re, q, max_relative = 1e-12);
            assert!(qb.im.abs() < 1e-12 * (1.0 + q.abs()));
            let omega_back = back.pump_avg.unwrap().norm();
            assert_relative_eq!(omega_back, omega, max_relative = 1e-12);
            let m = back.dipole_ratio.unwrap();
            assert_relative_eq!(m.re, 1.0, max_relative = 1e-12);
            assert_relative_eq!(back.gamma_tot_a, gamma + gammabar, max_relative = 1e-14);
            if gammabar > 0.0 {
                // Q identity: Q = (gamma q + gammabar qbar)/Gamma
                let lhs = back.q_weighted_a.unwrap();
                let rhs = (back.gamma_a * back.q_a.unwrap()
                    + back.gammabar_a * back.qbar_a.unwrap())
                    / back.gamma_tot_a;
                assert!((lhs - rhs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn config_raw_and_fano_styles() {
        let raw = raw_from_config(
            "# molecular-style set\nE_L = 1.0\nmu_a = 0.001\nmu_b = 0.001\n\
             mut_a = 0.02\nmut_b = 0.02\nV_a = 0.01\nV_b = 0.01\nJ_ab = 2e-4\nalpha_L = 1.0",
        )
        .unwrap();
        assert_eq!(raw.mu_a, cr(0.001));
        assert_eq!(raw.j_ab, cr(2e-4));

        let fano_cfg = raw_from_config(
            "gamma_a = 1\ngamma_b = 1\nq_a = 1\nq_b = 1\nOmega = 1\nJ_ab = 1.68",
        )
        .unwrap();
        assert_eq!(fano_cfg.j_ab, cr(1.68));
        let fano = derive_fano(&fano_cfg);
        assert_relative_eq!(fano.gamma_a, 1.0, max_relative = 1e-12);

        assert!(raw_from_config("V_a = 0.5\ngamma_a = 1").is_err());
        assert!(raw_from_config("nonsense = 1").is_err());
        assert!(raw_from_config("V_a 0.5").is_err());
    }
}

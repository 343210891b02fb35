//! Structured matrices of the coupled two-atom model and their eigensystems.
//!
//! The discrete sector (both electrons bound) is four dimensional with basis
//! `|00>, |10>, |01>, |11>`. Eliminating the flat continua closes the
//! dynamics on
//!
//! - a damped 2x2 block `L_j = -K_j + i pi I_j I_j†` per singly-ionized
//!   sector, and
//! - an effective non-Hermitian 4x4 `Abar = A - i pi (B_a B_a† + B_b B_b†)`
//!   for the discrete sector.
//!
//! Both eigensystems are computed with explicit residual checks; eigenvalues
//! of `L_j` sit in the closed upper half-plane and those of `Abar` in the
//! closed lower half-plane whenever the parameters are physical.

use crate::linalg::{char_poly4, null_space4, poly_roots};
use crate::params::{Atom, RawParams};
use crate::smallmat::*;
use crate::{C64, Error, Result};

use std::f64::consts::PI;

/// All structured matrices derived from one parameter set.
#[derive(Debug, Clone)]
pub struct ModelMatrices {
    /// Hermitian discrete-sector Hamiltonian (rotating frame).
    pub discrete: M4,
    /// Couplings from the discrete sector into continuum `a` / `b` (4x2).
    pub ion_a: M42,
    pub ion_b: M42,
    /// Bound-state 2x2 blocks accompanying a single ionized electron.
    pub bound_a: M2,
    pub bound_b: M2,
    /// Couplings from a singly-ionized sector into the joint continuum.
    pub chan_a: V2,
    pub chan_b: V2,
    /// Damped blocks `L_j = -K_j + i pi I_j I_j†`.
    pub damped_a: M2,
    pub damped_b: M2,
    /// Effective discrete-sector matrix `Abar`.
    pub effective: M4,
}

/// Build every structured matrix from raw constants.
pub fn build_structure(raw: &RawParams) -> ModelMatrices {
    let de_a = cr(raw.detuning(Atom::A));
    let de_b = cr(raw.detuning(Atom::B));
    let ma = raw.mu_a * raw.alpha_l;
    let mb = raw.mu_b * raw.alpha_l;
    let ta = raw.mut_a * raw.alpha_l;
    let tb = raw.mut_b * raw.alpha_l;
    let jab = raw.j_ab;

    let discrete: M4 = [
        [ZERO, ma.conj(), mb.conj(), ZERO],
        [ma, de_a, jab.conj(), mb.conj()],
        [mb, jab, de_b, ma.conj()],
        [ZERO, mb, ma, de_a + de_b],
    ];
    let ion_a: M42 = [
        [ta.conj(), ZERO],
        [raw.v_a.conj(), ZERO],
        [raw.j_a.conj(), ta.conj()],
        [ZERO, raw.v_a.conj()],
    ];
    let ion_b: M42 = [
        [tb.conj(), ZERO],
        [raw.j_b.conj(), tb.conj()],
        [raw.v_b.conj(), ZERO],
        [ZERO, raw.v_b.conj()],
    ];
    let bound = |m: C64, de: C64| -> M2 { [[ZERO, m.conj()], [m, de]] };
    let bound_a = bound(ma, de_a);
    let bound_b = bound(mb, de_b);
    let chan_a: V2 = [ta.conj(), raw.v_a.conj()];
    let chan_b: V2 = [tb.conj(), raw.v_b.conj()];

    let damped = |k: &M2, i: &V2| -> M2 {
        // L = -K + i pi I I†
        m2_add(&m2_scale(cr(-1.0), k), &m2_scale(I * PI, &m2_outer(i, i)))
    };
    let damped_a = damped(&bound_a, &chan_a);
    let damped_b = damped(&bound_b, &chan_b);

    let mut absorb = m4_zero();
    for bm in [&ion_a, &ion_b] {
        let badj = m42_adjoint(bm);
        absorb = m4_add(&absorb, &m42_mul_m24(bm, &badj));
    }
    let effective = m4_sub(&discrete, &m4_scale(I * PI, &absorb));

    ModelMatrices {
        discrete,
        ion_a,
        ion_b,
        bound_a,
        bound_b,
        chan_a,
        chan_b,
        damped_a,
        damped_b,
        effective,
    }
}

impl ModelMatrices {
    pub fn ion(&self, which: Atom) -> &M42 {
        match which {
            Atom::A => &self.ion_a,
            Atom::B => &self.ion_b,
        }
    }

    pub fn chan(&self, which: Atom) -> &V2 {
        match which {
            Atom::A => &self.chan_a,
            Atom::B => &self.chan_b,
        }
    }

    pub fn damped(&self, which: Atom) -> &M2 {
        match which {
            Atom::A => &self.damped_a,
            Atom::B => &self.damped_b,
        }
    }
}

/// Eigensystem of a damped 2x2 block: eigenvalues ordered by descending
/// imaginary part and their spectral projectors.
#[derive(Debug, Clone, Copy)]
pub struct Eig2 {
    pub values: [C64; 2],
    pub projectors: [M2; 2],
}

/// Closed-form eigensystem of a 2x2 matrix via trace and determinant,
/// with spectral projectors `P_1 = (L - lambda_2)/(lambda_1 - lambda_2)`,
/// `P_2 = 1 - P_1`.
pub fn eig2(l: &M2) -> Result<Eig2> {
    let half_trace = m2_trace(l) * 0.5;
    let det = m2_det(l);
    // lambda = tr/2 +- sqrt((tr/2)^2 - det), principal branch
    let disc = (half_trace * half_trace - det).sqrt();
    let mut l1 = half_trace + disc;
    let mut l2 = half_trace - disc;
    if l1.im < l2.im {
        std::mem::swap(&mut l1, &mut l2);
    }
    let scale = l1.norm().max(l2.norm());
    if (l1 - l2).norm() <= 1e-12 * scale.max(1e-300) {
        return Err(Error::DegenerateEigenvalues(format!(
            "2x2 block eigenvalues coincide at {l1}"
        )));
    }
    let inv_gap = ONE / (l1 - l2);
    let ident = m2_identity();
    let p1 = m2_scale(inv_gap, &m2_sub(l, &m2_scale(l2, &ident)));
    let p2 = m2_sub(&ident, &p1);
    Ok(Eig2 { values: [l1, l2], projectors: [p1, p2] })
}

/// Eigensystem of the effective 4x4: eigenvalues, right-eigenvector columns
/// `P`, its inverse, and a condition estimate for `P`.
#[derive(Debug, Clone, Copy)]
pub struct Eig4 {
    pub values: [C64; 4],
    pub vectors: M4,
    pub inverse: M4,
    pub cond_estimate: f64,
}

impl Eig4 {
    /// k-th right eigenvector (column of `P`).
    pub fn vector(&self, k: usize) -> V4 {
        [
            self.vectors[0][k],
            self.vectors[1][k],
            self.vectors[2][k],
            self.vectors[3][k],
        ]
    }

    /// k-th row of `P^-1`.
    pub fn left_row(&self, k: usize) -> V4 {
        self.inverse[k]
    }
}

const CLUSTER_TOL: f64 = 3e-7;
const RESIDUAL_TOL: f64 = 1e-10;
const COND_LIMIT: f64 = 1e8;

/// Diagonalize a (generically diagonalizable) complex 4x4 matrix.
///
/// The characteristic quartic is solved by simultaneous iteration; root
/// clusters within `3e-7` of each other (relative to the matrix scale) are
/// treated as one eigenvalue whose eigenspace is taken from a rank-revealing
/// null space, so exactly degenerate but diagonalizable inputs (e.g. two
/// identical uncoupled atoms) are handled without regularization. Residuals
/// and the eigenvector condition number are checked explicitly; failures
/// surface as [`Error::NearDefectiveMatrix`].
pub fn eig_abar(abar: &M4) -> Result<Eig4> {
    let scale = m4_frob_norm(abar).max(1e-300);
    let scaled = m4_scale(cr(1.0 / scale), abar);
    let coeffs = char_poly4(&scaled);
    let roots = poly_roots(&coeffs);
    debug_assert_eq!(roots.len(), 4);

    // Greedy clustering of the four roots.
    let mut assigned = [usize::MAX; 4];
    let mut n_clusters = 0;
    for i in 0..4 {
        if assigned[i] != usize::MAX {
            continue;
        }
        assigned[i] = n_clusters;
        for j in i + 1..4 {
            if assigned[j] == usize::MAX && (roots[i] - roots[j]).norm() <= CLUSTER_TOL {
                assigned[j] = n_clusters;
            }
        }
        n_clusters += 1;
    }

    let mut pairs: Vec<(C64, V4)> = Vec::with_capacity(4);
    for cluster in 0..n_clusters {
        let members: Vec<C64> = (0..4)
            .filter(|&i| assigned[i] == cluster)
            .map(|i| roots[i])
            .collect();
        let mult = members.len();
        let rough = members.iter().sum::<C64>() / mult as f64;
        // The cluster mean of a multiple root carries the square-root
        // sensitivity of the simultaneous iteration; Newton on the
        // (mult-1)-th derivative restores full accuracy.
        let mean = crate::linalg::refine_root(&coeffs, rough, mult);
        let radius = members
            .iter()
            .map(|z| (z - mean).norm())
            .fold(0.0_f64, f64::max);
        let mut shifted = scaled;
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] -= mean;
        }
        let rank_tol = (30.0 * radius).max(1e-9);
        let basis = null_space4(&shifted, rank_tol);
        if basis.len() != mult {
            return Err(Error::NearDefectiveMatrix {
                cond: if basis.len() < mult { f64::INFINITY } else { 1.0 / rank_tol },
            });
        }
        for v in basis {
            pairs.push((mean * scale, v));
        }
    }

    // Deterministic ordering: descending imaginary part, then ascending real.
    pairs.sort_by(|x, y| {
        y.0.im
            .total_cmp(&x.0.im)
            .then(x.0.re.total_cmp(&y.0.re))
    });

    let mut vectors = m4_zero();
    let mut values = [ZERO; 4];
    for (k, (val, vec)) in pairs.iter().enumerate() {
        values[k] = *val;
        for i in 0..4 {
            vectors[i][k] = vec[i];
        }
    }
    let inverse = m4_inverse(&vectors).ok_or(Error::NearDefectiveMatrix { cond: f64::INFINITY })?;
    let cond_estimate = m4_frob_norm(&vectors) * m4_frob_norm(&inverse);
    if cond_estimate > COND_LIMIT {
        return Err(Error::NearDefectiveMatrix { cond: cond_estimate });
    }
    let eig = Eig4 { values, vectors, inverse, cond_estimate };

    // Explicit residual checks.
    let tol = RESIDUAL_TOL * scale.max(1.0);
    for k in 0..4 {
        let v = eig.vector(k);
        let av = m4_matvec(abar, &v);
        let res = v4_norm_sq(&v4_sub(&av, &v4_scale(values[k], &v))).sqrt();
        let vnorm = v4_norm_sq(&v).sqrt();
        if res > tol * vnorm {
            return Err(Error::NearDefectiveMatrix { cond: cond_estimate });
        }
    }
    let prod = m4_mul(&eig.vectors, &eig.inverse);
    let id_res = m4_frob_norm(&m4_sub(&prod, &m4_identity()));
    if id_res > RESIDUAL_TOL {
        return Err(Error::NearDefectiveMatrix { cond: cond_estimate });
    }
    Ok(eig)
}

/// Frobenius distance from hermiticity, for diagnostics.
pub fn hermiticity_defect(m: &M4) -> f64 {
    m4_frob_norm(&m4_sub(m, &m4_adjoint(m)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{realize_raw, FanoParams, ScaleHints};
    use approx::assert_relative_eq;

    fn fig2_uncoupled() -> RawParams {
        realize_raw(&FanoParams::symmetric(1.0, 0.0, 1.0, 1.0), &ScaleHints::default()).unwrap()
    }

    #[test]
    fn undriven_matrices_reduce_to_diagonal() {
        let raw = RawParams {
            e_a0: 1.3,
            e_b0: 1.7,
            e_l: 1.0,
            v_a: cr(0.4),
            v_b: cr(0.6),
            alpha_l: cr(0.0),
            ..Default::default()
        };
        let m = build_structure(&raw);
        // A = diag(0, dE_a, dE_b, dE_a + dE_b)
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(m.discrete[i][j], ZERO);
                }
            }
        }
        assert_relative_eq!(m.discrete[1][1].re, 0.3, max_relative = 1e-14);
        assert_relative_eq!(m.discrete[2][2].re, 0.7, max_relative = 1e-14);
        assert_relative_eq!(m.discrete[3][3].re, 1.0, max_relative = 1e-14);
        // only V entries left in the ionization couplings
        assert_eq!(m.ion_a[0][0], ZERO);
        assert_eq!(m.ion_a[1][0], raw.v_a.conj());
        assert_eq!(m.ion_a[3][1], raw.v_a.conj());
        assert_eq!(m.ion_b[2][0], raw.v_b.conj());
    }

    #[test]
    fn zero_couplings_collapse_damped_blocks() {
        let raw = RawParams {
            e_a0: 1.2,
            e_b0: 1.1,
            mu_a: cr(0.3),
            mu_b: cr(0.2),
            ..Default::default()
        };
        let m = build_structure(&raw);
        assert_eq!(m.effective, m.discrete);
        let neg_k = m2_scale(cr(-1.0), &m.bound_a);
        assert_eq!(m.damped_a, neg_k);
    }

    #[test]
    fn structural_identities_hold_exactly() {
        let raw = realize_raw(
            &FanoParams::symmetric(1.0, 1.0, 1.0, 1.0),
            &ScaleHints { j_ab: cr(1.68), ..Default::default() },
        )
        .unwrap();
        let m = build_structure(&raw);
        // L_j = -K_j + i pi I_j I_j†
        for (l, k, i) in [(&m.damped_a, &m.bound_a, &m.chan_a), (&m.damped_b, &m.bound_b, &m.chan_b)]
        {
            let rebuilt = m2_add(&m2_scale(cr(-1.0), k), &m2_scale(I * PI, &m2_outer(i, i)));
            assert!(m2_frob_norm(&m2_sub(l, &rebuilt)) == 0.0);
        }
        // A is Hermitian
        assert!(hermiticity_defect(&m.discrete) < 1e-15);
        // Abar = A - i pi sum B B†
        let mut absorb = m4_zero();
        for b in [&m.ion_a, &m.ion_b] {
            absorb = m4_add(&absorb, &m42_mul_m24(b, &m42_adjoint(b)));
        }
        let rebuilt = m4_sub(&m.discrete, &m4_scale(I * PI, &absorb));
        assert!(m4_frob_norm(&m4_sub(&m.effective, &rebuilt)) == 0.0);
    }

    #[test]
    fn undriven_damped_block_eigenvalues() {
        // alpha_L = 0: L = [[0,0],[0, -dE0 + i pi |V|^2]]
        let raw = RawParams {
            e_a0: 1.5,
            v_a: cr(0.7),
            alpha_l: cr(0.0),
            mu_a: cr(0.3),
            mut_a: cr(0.1),
            ..Default::default()
        };
        let m = build_structure(&raw);
        let eig = eig2(&m.damped_a).unwrap();
        let expect = cr(-0.5) + I * PI * 0.49;
        let got: Vec<C64> = eig.values.to_vec();
        assert!(got.iter().any(|z| (z - expect).norm() < 1e-14));
        assert!(got.iter().any(|z| z.norm() < 1e-14));
    }

    #[test]
    fn eig2_matches_independent_quartic_solver() {
        let raw = fig2_uncoupled();
        let m = build_structure(&raw);
        let eig = eig2(&m.damped_a).unwrap();
        // Embed L into a block-diagonal 4x4 and solve with the quartic path.
        let mut big = m4_zero();
        for i in 0..2 {
            for j in 0..2 {
                big[i][j] = m.damped_a[i][j];
            }
        }
        big[2][2] = cr(5.0);
        big[3][3] = c(7.0, 2.0);
        let roots = poly_roots(&char_poly4(&big));
        for lam in eig.values {
            let best = roots.iter().map(|r| (r - lam).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-12, "closed form {lam} vs quartic, off by {best}");
        }
    }

    #[test]
    fn projectors_resolve_identity_and_idempotency() {
        let raw = realize_raw(
            &FanoParams::symmetric(1.0, 0.5, -2.0, 2.0),
            &ScaleHints { j_ab: cr(0.56), ..Default::default() },
        )
        .unwrap();
        let m = build_structure(&raw);
        for which in [Atom::A, Atom::B] {
            let eig = eig2(m.damped(which)).unwrap();
            let sum = m2_add(&eig.projectors[0], &eig.projectors[1]);
            assert!(m2_frob_norm(&m2_sub(&sum, &m2_identity())) < 1e-12);
            let cross = m2_mul(&eig.projectors[0], &eig.projectors[1]);
            assert!(m2_frob_norm(&cross) < 1e-10);
            for k in 0..2 {
                let sq = m2_mul(&eig.projectors[k], &eig.projectors[k]);
                assert!(m2_frob_norm(&m2_sub(&sq, &eig.projectors[k])) < 1e-10);
            }
            // spectral reconstruction
            let rebuilt = m2_add(
                &m2_scale(eig.values[0], &eig.projectors[0]),
                &m2_scale(eig.values[1], &eig.projectors[1]),
            );
            assert!(m2_frob_norm(&m2_sub(&rebuilt, m.damped(which))) < 1e-10);
        }
    }

    #[test]
    fn diagonal_effective_matrix_is_its_own_eigensystem() {
        let mut d = m4_zero();
        d[0][0] = c(1.0, -0.1);
        d[1][1] = c(2.0, -0.2);
        d[2][2] = c(-1.0, -0.3);
        d[3][3] = c(0.5, -0.4);
        let eig = eig_abar(&d).unwrap();
        let mut diag: Vec<C64> = (0..4).map(|i| d[i][i]).collect();
        diag.sort_by(|x, y| y.im.total_cmp(&x.im));
        for (got, want) in eig.values.iter().zip(&diag) {
            assert!((got - want).norm() < 1e-12);
        }
        // eigenvectors are (permuted, phased) unit vectors
        for k in 0..4 {
            let v = eig.vector(k);
            let mags: Vec<f64> = v.iter().map(|z| z.norm()).collect();
            let top = mags.iter().cloned().fold(0.0, f64::max);
            assert!(mags.iter().filter(|&&m| m > 1e-8).count() == 1 && (top - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hermitian_effective_matrix_has_real_spectrum() {
        let raw = fig2_uncoupled();
        let m = build_structure(&raw);
        let eig = eig_abar(&m.discrete).unwrap();
        for lam in eig.values {
            assert!(lam.im.abs() < 1e-10, "Hermitian input produced {lam}");
        }
    }

    #[test]
    fn physical_effective_matrix_decays() {
        let raw = fig2_uncoupled();
        let m = build_structure(&raw);
        let eig = eig_abar(&m.effective).unwrap();
        for lam in eig.values {
            assert!(lam.im < 0.0, "expected strictly decaying mode, got {lam}");
        }
        // trace consistency
        let sum: C64 = eig.values.iter().sum();
        assert!((sum - m4_trace(&m.effective)).norm() < 1e-10);
    }

    #[test]
    fn degenerate_uncoupled_pair_is_diagonalizable() {
        // Two identical uncoupled atoms give an exactly repeated eigenvalue
        // of Abar with a full two-dimensional eigenspace.
        let raw = fig2_uncoupled();
        let m = build_structure(&raw);
        let eig = eig_abar(&m.effective).unwrap();
        let mut min_gap = f64::INFINITY;
        for i in 0..4 {
            for j in i + 1..4 {
                min_gap = min_gap.min((eig.values[i] - eig.values[j]).norm());
            }
        }
        assert!(min_gap < 1e-7, "expected a repeated eigenvalue, min gap {min_gap}");
        assert!(eig.cond_estimate < 1e4);
    }

    #[test]
    fn degenerate_damped_block_is_reported() {
        let l: M2 = [[cr(1.0), ZERO], [ZERO, cr(1.0)]];
        assert!(matches!(eig2(&l), Err(Error::DegenerateEigenvalues(_))));
    }
}

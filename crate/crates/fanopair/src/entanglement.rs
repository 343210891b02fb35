//! Quadratic negativity of the two-electron continuum state.
//!
//! For a pure bipartite state with Schmidt coefficients `lambda_n` the
//! quadratic negativity is `N = 2 (1 - sum lambda_n^4) = 2 (1 - 1/K)`, `K`
//! being the Schmidt number. Three independent routes are implemented so
//! they can cross-check each other on a shared grid:
//!
//! - `schmidt`: singular values of the quadrature-weighted kernel
//!   `M = sqrt(W_a) d sqrt(W_b)` (Nystrom reduction of the continuous
//!   decomposition),
//! - `trace`: purity of the reduced kernel of either electron,
//! - `bruteforce`: the literal quadruple quadrature of the negativity
//!   functional.
//!
//! A pointwise joint density of negativity re-integrates to the same value,
//! and restricting the energy integrals to windows gives the filtered
//! negativities of narrow-band-detected electron pairs.

use rayon::prelude::*;

use crate::linalg::hermitian_eigenvalues;
use crate::params::Atom;
use crate::spectra::{EnergyGrid, JointSpectrum};
use crate::util::Grid2;
use crate::{C64, Error, Result};

const ZERO_C: C64 = C64::new(0.0, 0.0);

/// Singular values of the weighted joint-amplitude kernel, descending,
/// normalized so their squares sum to one.
#[derive(Debug, Clone)]
pub struct SchmidtSpectrum {
    pub lambdas: Vec<f64>,
    /// Schmidt number `K = 1 / sum lambda^4`.
    pub schmidt_number: f64,
}

fn require_normalized(joint: &JointSpectrum) -> Result<()> {
    if !joint.normalized {
        return Err(Error::NotNormalized { norm: joint.norm_quadrature });
    }
    Ok(())
}

/// Weighted kernel `M[i][j] = d(E_a_i, E_b_j) sqrt(w_a_i w_b_j)`.
fn weighted_kernel(joint: &JointSpectrum) -> Grid2<C64> {
    let n = joint.grid.points();
    let sa: Vec<f64> = joint.grid.weights(Atom::A).iter().map(|w| w.sqrt()).collect();
    let sb: Vec<f64> = joint.grid.weights(Atom::B).iter().map(|w| w.sqrt()).collect();
    let mut m = Grid2::<C64>::zeros(n, n);
    for i in 0..n {
        let src = joint.amplitude.row(i);
        let dst = m.row_mut(i);
        for j in 0..n {
            dst[j] = src[j] * sa[i] * sb[j];
        }
    }
    m
}

/// Conjugate-transposed copy.
fn adjoint(m: &Grid2<C64>) -> Grid2<C64> {
    let (r, c) = (m.rows(), m.cols());
    let mut t = Grid2::<C64>::zeros(c, r);
    for i in 0..r {
        let row = m.row(i);
        for (j, item) in row.iter().enumerate() {
            *t.get_mut(j, i) = item.conj();
        }
    }
    t
}

/// Hermitian Gram matrix `M† M`, built from row dot products of the
/// adjoint for contiguous access.
fn gram(m: &Grid2<C64>) -> Grid2<C64> {
    let madj = adjoint(m); // rows are conjugated columns of m
    let n = madj.rows();
    let len = madj.cols();
    let mut g = Grid2::<C64>::zeros(n, n);
    let madj_ref = &madj;
    g.par_rows_mut().for_each(|(i, row)| {
        let ri = madj_ref.row(i);
        for (j, out) in row.iter_mut().enumerate().skip(i) {
            let rj = madj_ref.row(j);
            let mut s = ZERO_C;
            for k in 0..len {
                s += ri[k] * rj[k].conj();
            }
            *out = s;
        }
    });
    for i in 0..n {
        for j in 0..i {
            *g.get_mut(i, j) = g.get(j, i).conj();
        }
    }
    g
}

fn frobenius_sq(m: &Grid2<C64>) -> f64 {
    m.as_slice().iter().map(|z| z.norm_sqr()).sum()
}

/// Schmidt spectrum of a normalized joint spectrum. Singular values below
/// `1e-12` of the leading one are quadrature noise and are truncated before
/// forming the Schmidt number.
pub fn schmidt(joint: &JointSpectrum) -> Result<SchmidtSpectrum> {
    require_normalized(joint)?;
    let m = weighted_kernel(joint);
    let g = gram(&m);
    let eigs = hermitian_eigenvalues(&g)?;
    let mut lambdas: Vec<f64> = eigs.iter().rev().map(|v| v.max(0.0).sqrt()).collect();
    let top = lambdas.first().copied().unwrap_or(0.0);
    lambdas.retain(|l| *l > 1e-12 * top);
    let sum_sq: f64 = lambdas.iter().map(|l| l * l).sum();
    if (sum_sq - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { norm: sum_sq });
    }
    let sum4: f64 = lambdas.iter().map(|l| l.powi(4)).sum();
    Ok(SchmidtSpectrum { lambdas, schmidt_number: 1.0 / sum4 })
}

/// `N = 2 (1 - sum lambda^4)` from a Schmidt spectrum.
pub fn negativity_schmidt(s: &SchmidtSpectrum) -> f64 {
    2.0 * (1.0 - 1.0 / s.schmidt_number)
}

/// Negativity from the purity of the reduced kernels of both electrons.
#[derive(Debug, Clone, Copy)]
pub struct TraceNegativity {
    pub value: f64,
    pub purity_a: f64,
    pub purity_b: f64,
}

/// `N = 2 [1 - purity]` via the reduced kernel of atom `b`, cross-checked
/// against the same construction on atom `a` (they agree for a pure state).
pub fn negativity_trace(joint: &JointSpectrum) -> Result<TraceNegativity> {
    require_normalized(joint)?;
    let m = weighted_kernel(joint);
    let purity_b = frobenius_sq(&gram(&m));
    let purity_a = frobenius_sq(&gram(&adjoint(&m)));
    if (purity_a - purity_b).abs() > 1e-8 * (1.0 + purity_b.abs()) {
        return Err(Error::DegenerateEigenvalues(format!(
            "reduced purities disagree: {purity_a} vs {purity_b}"
        )));
    }
    Ok(TraceNegativity { value: 2.0 * (1.0 - purity_b), purity_a, purity_b })
}

const BRUTE_MAX_POINTS: usize = 64;

/// Literal quadruple quadrature of the negativity functional
/// (`O(G^4)`, restricted to small grids).
pub fn negativity_bruteforce(joint: &JointSpectrum) -> Result<f64> {
    require_normalized(joint)?;
    let n = joint.grid.points();
    if n > BRUTE_MAX_POINTS {
        return Err(Error::GridTooLarge { points: n, max: BRUTE_MAX_POINTS });
    }
    let wa = joint.grid.weights(Atom::A);
    let wb = joint.grid.weights(Atom::B);
    let amp = &joint.amplitude;
    let partials: Vec<C64> = (0..n)
        .into_par_iter()
        .map(|ia| {
            let mut acc = ZERO_C;
            for iap in 0..n {
                for jb in 0..n {
                    for jbp in 0..n {
                        let w = wa[ia] * wa[iap] * wb[jb] * wb[jbp];
                        let d_ab = amp.get(ia, jb);
                        let d_apbp = amp.get(iap, jbp);
                        let d_apb = amp.get(iap, jb);
                        let d_abp = amp.get(ia, jbp);
                        let direct = d_ab.norm_sqr() * d_apbp.norm_sqr();
                        let exchange = d_ab.conj() * d_apb * d_apbp.conj() * d_abp;
                        acc += w * (C64::new(direct, 0.0) - exchange);
                    }
                }
            }
            acc
        })
        .collect();
    let total: C64 = partials.iter().sum();
    Ok(2.0 * total.re)
}

/// Pointwise joint density of negativity at the grid nodes nearest the four
/// energies. Vanishing marginal or bracket factors make the density
/// undefined; those points return a flagged zero.
pub fn negativity_density(
    joint: &JointSpectrum,
    e_a: f64,
    e_ap: f64,
    e_b: f64,
    e_bp: f64,
) -> Result<f64> {
    require_normalized(joint)?;
    let ia = nearest(joint.grid.axis(Atom::A), e_a);
    let iap = nearest(joint.grid.axis(Atom::A), e_ap);
    let jb = nearest(joint.grid.axis(Atom::B), e_b);
    let jbp = nearest(joint.grid.axis(Atom::B), e_bp);
    let rho_a = marginal_vector(joint);
    Ok(density_at(joint, &rho_a, ia, iap, jb, jbp).0)
}

fn nearest(axis: &[f64], e: f64) -> usize {
    let mut best = 0;
    let mut dist = f64::INFINITY;
    for (i, &x) in axis.iter().enumerate() {
        let d = (x - e).abs();
        if d < dist {
            dist = d;
            best = i;
        }
    }
    best
}

fn marginal_vector(joint: &JointSpectrum) -> Vec<f64> {
    let n = joint.grid.points();
    let wb = joint.grid.weights(Atom::B);
    (0..n)
        .map(|i| {
            joint
                .intensity
                .row(i)
                .iter()
                .zip(wb)
                .map(|(v, w)| v * w)
                .sum()
        })
        .collect()
}

const DENSITY_FLOOR: f64 = 1e-300;

/// Density value and a flag marking an undefined (vanishing-denominator)
/// point that contributed a flagged zero.
fn density_at(
    joint: &JointSpectrum,
    rho_a: &[f64],
    ia: usize,
    iap: usize,
    jb: usize,
    jbp: usize,
) -> (f64, bool) {
    let rho = |i: usize, j: usize| -> f64 { *joint.intensity.get(i, j) };
    let bracket_b = rho(ia, jb) + rho(iap, jb);
    let bracket_bp = rho(ia, jbp) + rho(iap, jbp);
    let denom = rho_a[ia] * rho_a[iap] * bracket_b * bracket_bp;
    if denom < DENSITY_FLOOR {
        return (0.0, true);
    }
    let d = &joint.amplitude;
    let exchange = d.get(ia, jb).conj() * d.get(iap, jb) * d.get(iap, jbp).conj() * d.get(ia, jbp);
    let numer = 2.0 * (rho(ia, jb) * rho(iap, jbp) - exchange.re);
    (numer / denom, false)
}

const DENSITY_MAX_POINTS: usize = 48;

/// Re-integrate the joint density of negativity over the whole grid; equals
/// the brute-force negativity up to roundoff. `O(G^4)`.
pub fn reintegrate_density(joint: &JointSpectrum) -> Result<f64> {
    require_normalized(joint)?;
    let n = joint.grid.points();
    if n > DENSITY_MAX_POINTS {
        return Err(Error::GridTooLarge { points: n, max: DENSITY_MAX_POINTS });
    }
    let rho_a = marginal_vector(joint);
    let wa = joint.grid.weights(Atom::A);
    let wb = joint.grid.weights(Atom::B);
    let rho = |i: usize, j: usize| -> f64 { *joint.intensity.get(i, j) };
    let mut total = 0.0;
    for ia in 0..n {
        for iap in 0..n {
            let outer = wa[ia] * wa[iap] * rho_a[ia] * rho_a[iap];
            if outer == 0.0 {
                continue;
            }
            let mut inner = 0.0;
            for jb in 0..n {
                for jbp in 0..n {
                    let (nval, flagged) = density_at(joint, &rho_a, ia, iap, jb, jbp);
                    if flagged {
                        continue;
                    }
                    inner += wb[jb]
                        * wb[jbp]
                        * (rho(ia, jb) + rho(iap, jb))
                        * (rho(ia, jbp) + rho(iap, jbp))
                        * nval;
                }
            }
            total += outer * inner;
        }
    }
    Ok(total)
}

// ----------------------------------------------------------- filtering

/// Core of the filtered negativities: the verbatim window-restricted
/// quadruple quadrature of the density form. Rows of `amp` are the filtered
/// `a` points (weights `wa`), columns the `b` integration points (`wb`;
/// the full axis for one-sided filtering, a window for two-sided).
/// `rho_a_full` holds the full-range marginal of atom `a` at the row points.
fn filtered_core(amp: &Grid2<C64>, wa: &[f64], wb: &[f64], rho_a_full: &[f64]) -> Result<f64> {
    let rows = amp.rows();
    let cols = amp.cols();
    let rho = |i: usize, j: usize| amp.get(i, j).norm_sqr();
    let mut norm = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            norm += wa[i] * wb[j] * rho(i, j);
        }
    }
    if norm < 1e-12 {
        return Err(Error::EmptyWindow { norm });
    }
    let partials: Vec<f64> = (0..rows)
        .into_par_iter()
        .map(|ia| {
            let mut acc = 0.0;
            for iap in 0..rows {
                let outer = wa[ia] * wa[iap] * rho_a_full[ia] * rho_a_full[iap];
                if outer == 0.0 {
                    continue;
                }
                for jb in 0..cols {
                    let bracket_b = rho(ia, jb) + rho(iap, jb);
                    if bracket_b == 0.0 {
                        continue;
                    }
                    for jbp in 0..cols {
                        let bracket_bp = rho(ia, jbp) + rho(iap, jbp);
                        let denom = rho_a_full[ia] * rho_a_full[iap] * bracket_b * bracket_bp;
                        if denom < DENSITY_FLOOR {
                            continue;
                        }
                        let exch = amp.get(ia, jb).conj()
                            * amp.get(iap, jb)
                            * amp.get(iap, jbp).conj()
                            * amp.get(ia, jbp);
                        let nval = 2.0 * (rho(ia, jb) * rho(iap, jbp) - exch.re) / denom;
                        acc += outer * wb[jb] * wb[jbp] * bracket_b * bracket_bp * nval;
                    }
                }
            }
            acc
        })
        .collect();
    let total: f64 = partials.iter().sum();
    Ok(total / (norm * norm))
}

/// Schmidt-route value of the same windowed, renormalized state, used as a
/// cross-check of the verbatim window quadrature.
fn filtered_schmidt(amp: &Grid2<C64>, wa: &[f64], wb: &[f64]) -> f64 {
    let rows = amp.rows();
    let cols = amp.cols();
    let mut m = Grid2::<C64>::zeros(rows, cols);
    let mut norm = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let v = *amp.get(i, j) * (wa[i] * wb[j]).sqrt();
            norm += v.norm_sqr();
            *m.get_mut(i, j) = v;
        }
    }
    if norm <= 0.0 {
        return 0.0;
    }
    let purity = frobenius_sq(&gram(&m)) / (norm * norm);
    2.0 * (1.0 - purity)
}

fn window_indices(axis: &[f64], center: f64, half_width: f64) -> Vec<usize> {
    axis.iter()
        .enumerate()
        .filter(|(_, &e)| (e - center).abs() <= half_width)
        .map(|(i, _)| i)
        .collect()
}

/// Negativity of the state filtered to `|E_a - ea0| <= de`, using the
/// joint spectrum's own grid nodes inside the window.
pub fn negativity_filtered_a(joint: &JointSpectrum, ea0: f64, de: f64) -> Result<f64> {
    require_normalized(joint)?;
    let rows = window_indices(joint.grid.axis(Atom::A), ea0, de);
    if rows.is_empty() {
        return Err(Error::EmptyWindow { norm: 0.0 });
    }
    let cols = joint.grid.points();
    let mut amp = Grid2::<C64>::zeros(rows.len(), cols);
    for (r, &i) in rows.iter().enumerate() {
        amp.row_mut(r).copy_from_slice(joint.amplitude.row(i));
    }
    let wa: Vec<f64> = rows.iter().map(|&i| joint.grid.weights(Atom::A)[i]).collect();
    let rho_full = marginal_vector(joint);
    let rho_rows: Vec<f64> = rows.iter().map(|&i| rho_full[i]).collect();
    filtered_core(&amp, &wa, joint.grid.weights(Atom::B), &rho_rows)
}

/// Negativity of the state filtered to `|E_a - ea0| <= de` and
/// `|E_b - eb0| <= de` on the joint spectrum's grid.
pub fn negativity_filtered_ab(
    joint: &JointSpectrum,
    ea0: f64,
    eb0: f64,
    de: f64,
) -> Result<f64> {
    require_normalized(joint)?;
    let rows = window_indices(joint.grid.axis(Atom::A), ea0, de);
    let cols = window_indices(joint.grid.axis(Atom::B), eb0, de);
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::EmptyWindow { norm: 0.0 });
    }
    let mut amp = Grid2::<C64>::zeros(rows.len(), cols.len());
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            *amp.get_mut(r, c) = *joint.amplitude.get(i, j);
        }
    }
    let wa: Vec<f64> = rows.iter().map(|&i| joint.grid.weights(Atom::A)[i]).collect();
    let wb: Vec<f64> = cols.iter().map(|&j| joint.grid.weights(Atom::B)[j]).collect();
    let rho_full = marginal_vector(joint);
    let rho_rows: Vec<f64> = rows.iter().map(|&i| rho_full[i]).collect();
    filtered_core(&amp, &wa, &wb, &rho_rows)
}

fn window_axis(center: f64, half_width: f64, points: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 2.0 * half_width / (points - 1) as f64;
    let axis: Vec<f64> = (0..points).map(|k| center - half_width + h * k as f64).collect();
    let mut w = vec![h; points];
    w[0] = 0.5 * h;
    w[points - 1] = 0.5 * h;
    (axis, w)
}

/// One-sided filtered negativity on a dedicated fine window axis, for
/// windows much narrower than the working grid spacing. The partner axis of
/// `grid` carries the full-range integrations.
pub fn negativity_filtered_a_fine(
    model: &crate::dynamics::Model,
    grid: &EnergyGrid,
    ea0: f64,
    de: f64,
    win_points: usize,
) -> Result<f64> {
    let (axis_w, wa) = window_axis(ea0, de, win_points.max(5));
    let axis_b = grid.axis(Atom::B);
    let bsums = model.bpole_sums(axis_b);
    let mut amp = Grid2::<C64>::zeros(axis_w.len(), axis_b.len());
    for (r, &ea) in axis_w.iter().enumerate() {
        model.longtime_row(ea, axis_b, &bsums, amp.row_mut(r));
    }
    let wb = grid.weights(Atom::B);
    let rho_rows: Vec<f64> = (0..axis_w.len())
        .map(|r| {
            amp.row(r)
                .iter()
                .zip(wb)
                .map(|(z, &w)| w * z.norm_sqr())
                .sum()
        })
        .collect();
    filtered_core(&amp, &wa, wb, &rho_rows)
}

/// Two-sided filtered negativity on dedicated fine window axes.
pub fn negativity_filtered_ab_fine(
    model: &crate::dynamics::Model,
    grid: &EnergyGrid,
    ea0: f64,
    eb0: f64,
    de: f64,
    win_points: usize,
) -> Result<f64> {
    let (axis_wa, wa) = window_axis(ea0, de, win_points.max(5));
    let (axis_wb, wb) = window_axis(eb0, de, win_points.max(5));
    let mut amp = Grid2::<C64>::zeros(axis_wa.len(), axis_wb.len());
    let bsums = model.bpole_sums(&axis_wb);
    for (r, &ea) in axis_wa.iter().enumerate() {
        model.longtime_row(ea, &axis_wb, &bsums, amp.row_mut(r));
    }
    // full-range marginal at the window's a points
    let full_b = grid.axis(Atom::B);
    let full_bsums = model.bpole_sums(full_b);
    let mut row = vec![ZERO_C; full_b.len()];
    let rho_rows: Vec<f64> = axis_wa
        .iter()
        .map(|&ea| {
            model.longtime_row(ea, full_b, &full_bsums, &mut row);
            row.iter()
                .zip(grid.weights(Atom::B))
                .map(|(z, &w)| w * z.norm_sqr())
                .sum()
        })
        .collect();
    filtered_core(&amp, &wa, &wb, &rho_rows)
}

/// Cross-check variant: verbatim window quadrature next to the windowed
/// Schmidt negativity of the renormalized state.
pub fn negativity_filtered_ab_crosscheck(
    joint: &JointSpectrum,
    ea0: f64,
    eb0: f64,
    de: f64,
) -> Result<(f64, f64)> {
    let verbatim = negativity_filtered_ab(joint, ea0, eb0, de)?;
    let rows = window_indices(joint.grid.axis(Atom::A), ea0, de);
    let cols = window_indices(joint.grid.axis(Atom::B), eb0, de);
    let mut amp = Grid2::<C64>::zeros(rows.len(), cols.len());
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            *amp.get_mut(r, c) = *joint.amplitude.get(i, j);
        }
    }
    let wa: Vec<f64> = rows.iter().map(|&i| joint.grid.weights(Atom::A)[i]).collect();
    let wb: Vec<f64> = cols.iter().map(|&j| joint.grid.weights(Atom::B)[j]).collect();
    Ok((verbatim, filtered_schmidt(&amp, &wa, &wb)))
}

// ----------------------------------------- two-level-model reduced oracle

/// Negativity of a qubit-continuum state with amplitudes `d_0`, `d_1`,
/// evaluated by the direct double quadrature and re-integrated through its
/// density form.
#[derive(Debug, Clone, Copy)]
pub struct QubitNegativity {
    pub direct: f64,
    pub via_density: f64,
}

/// Joint density of negativity of the qubit-continuum state at `(e, ep)`:
/// one minus the normalized overlap of the local qubit amplitude vectors;
/// always in `[0, 1]`.
pub fn qubit_negativity_density(
    d0: &dyn Fn(f64) -> C64,
    d1: &dyn Fn(f64) -> C64,
    e: f64,
    ep: f64,
) -> f64 {
    let v = [d0(e), d1(e)];
    let vp = [d0(ep), d1(ep)];
    let rho = v[0].norm_sqr() + v[1].norm_sqr();
    let rho_p = vp[0].norm_sqr() + vp[1].norm_sqr();
    if rho * rho_p < DENSITY_FLOOR {
        return 0.0;
    }
    let overlap = v[0].conj() * vp[0] + v[1].conj() * vp[1];
    1.0 - overlap.norm_sqr() / (rho * rho_p)
}

/// Quadratic negativity of the qubit-continuum state on a quadrature axis.
pub fn qubit_continuum_negativity(
    d0: &dyn Fn(f64) -> C64,
    d1: &dyn Fn(f64) -> C64,
    axis: &[f64],
    weights: &[f64],
) -> Result<QubitNegativity> {
    let v0: Vec<C64> = axis.iter().map(|&e| d0(e)).collect();
    let v1: Vec<C64> = axis.iter().map(|&e| d1(e)).collect();
    let rho: Vec<f64> = v0
        .iter()
        .zip(&v1)
        .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
        .collect();
    let norm: f64 = rho.iter().zip(weights).map(|(r, w)| r * w).sum();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::NotNormalized { norm });
    }
    let n = axis.len();
    let mut direct = 0.0;
    let mut via_density = 0.0;
    for i in 0..n {
        for j in 0..n {
            let w = weights[i] * weights[j];
            let overlap = v0[i].conj() * v0[j] + v1[i].conj() * v1[j];
            direct += w * (rho[i] * rho[j] - overlap.norm_sqr());
            let nval = if rho[i] * rho[j] < DENSITY_FLOOR {
                0.0
            } else {
                1.0 - overlap.norm_sqr() / (rho[i] * rho[j])
            };
            via_density += w * rho[i] * rho[j] * nval;
        }
    }
    Ok(QubitNegativity { direct: 2.0 * direct, via_density: 2.0 * via_density })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Model;
    use crate::params::{realize_raw, FanoParams, ScaleHints};
    use crate::smallmat::cr;
    use crate::spectra::sample_joint;
    use approx::assert_relative_eq;

    fn model(gammabar: f64, j_ab: f64) -> Model {
        let raw = realize_raw(
            &FanoParams::symmetric(1.0, gammabar, 1.0, 1.0),
            &ScaleHints { j_ab: cr(j_ab), ..Default::default() },
        )
        .unwrap();
        Model::new(raw).unwrap()
    }

    fn joint(m: &Model, points: usize) -> JointSpectrum {
        let g = EnergyGrid::for_model(m, points, 12.0).unwrap();
        sample_joint(m, &g, true)
    }

    /// Synthetic normalized spectrum whose weighted kernel is
    /// `identity / sqrt(rank)` on the leading block.
    fn synthetic_diag(points: usize, rank: usize) -> JointSpectrum {
        let grid = EnergyGrid::symmetric(0.0, 1.0, points).unwrap();
        let mut amplitude = Grid2::<C64>::zeros(points, points);
        for i in 0..rank {
            let w = grid.weights(Atom::A)[i] * grid.weights(Atom::B)[i];
            *amplitude.get_mut(i, i) = C64::new(1.0 / (rank as f64 * w).sqrt(), 0.0);
        }
        let intensity = amplitude.map(|z| z.norm_sqr());
        JointSpectrum {
            grid,
            amplitude,
            intensity,
            norm_quadrature: 1.0,
            boundary_ratio: 0.0,
            normalized: true,
        }
    }

    #[test]
    fn product_state_is_separable_on_every_route() {
        let m = model(0.0, 0.0);
        let j = joint(&m, 129);
        let s = schmidt(&j).unwrap();
        assert!((s.schmidt_number - 1.0).abs() < 1e-6, "K = {}", s.schmidt_number);
        assert!(negativity_schmidt(&s).abs() < 1e-6);
        let t = negativity_trace(&j).unwrap();
        assert!(t.value.abs() < 1e-8, "trace route {}", t.value);

        let small = joint(&m, 33);
        assert!(negativity_bruteforce(&small).unwrap().abs() < 1e-8);
        for (ea, eap, eb, ebp) in [(0.7, 1.2, 0.9, 1.1), (1.0, 0.5, 1.5, 0.8)] {
            let d = negativity_density(&small, ea, eap, eb, ebp).unwrap();
            assert!(d.abs() < 1e-10, "density {d}");
        }
    }

    #[test]
    fn maximally_entangled_synthetic_kernels() {
        for rank in [2usize, 5] {
            let j = synthetic_diag(17, rank);
            let s = schmidt(&j).unwrap();
            assert_eq!(s.lambdas.len(), rank);
            for l in &s.lambdas {
                assert_relative_eq!(*l, 1.0 / (rank as f64).sqrt(), max_relative = 1e-10);
            }
            let want = 2.0 * (rank as f64 - 1.0) / rank as f64;
            assert_relative_eq!(negativity_schmidt(&s), want, max_relative = 1e-10);
            if rank == 2 {
                // Bell-like kernel: brute force gives exactly 1
                assert_relative_eq!(
                    negativity_bruteforce(&j).unwrap(),
                    1.0,
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn three_routes_agree_on_shared_grid() {
        for (gb, jab) in [(0.0, 1.0), (1.0, 0.0), (0.5, 0.56)] {
            let m = model(gb, jab);
            let g = EnergyGrid::for_model(&m, 33, 12.0).unwrap();
            let j = sample_joint(&m, &g, true);
            let ns = negativity_schmidt(&schmidt(&j).unwrap());
            let nt = negativity_trace(&j).unwrap().value;
            let nb = negativity_bruteforce(&j).unwrap();
            assert!((ns - nt).abs() < 1e-8, "schmidt {ns} vs trace {nt}");
            assert!((ns - nb).abs() < 1e-6, "schmidt {ns} vs brute {nb}");
            let nd = reintegrate_density(&j).unwrap();
            assert!((nd - nb).abs() < 1e-6, "density {nd} vs brute {nb}");
        }
    }

    #[test]
    fn density_vanishes_on_diagonal_pairs() {
        let m = model(1.0, 0.5);
        let j = joint(&m, 33);
        for (ea, eb) in [(0.8, 1.1), (1.0, 1.0)] {
            let d = negativity_density(&j, ea, ea, eb, eb).unwrap();
            assert!(d.abs() < 1e-12, "diagonal density {d}");
        }
    }

    #[test]
    fn local_phases_change_no_negativity() {
        let m = model(1.0, 1.0);
        let mut j = joint(&m, 65);
        let before = negativity_trace(&j).unwrap().value;
        let s_before = negativity_schmidt(&schmidt(&j).unwrap());
        j.apply_local_phases(
            |ea| C64::from_polar(1.0, 1.3 * ea * ea),
            |eb| C64::from_polar(1.0, -0.7 * eb + 2.0),
        );
        let after = negativity_trace(&j).unwrap().value;
        let s_after = negativity_schmidt(&schmidt(&j).unwrap());
        assert!((before - after).abs() < 1e-10);
        assert!((s_before - s_after).abs() < 1e-10);
    }

    #[test]
    fn filtered_full_window_recovers_unfiltered() {
        let m = model(1.0, 0.0);
        let j = joint(&m, 65);
        let unfiltered = negativity_trace(&j).unwrap().value;
        let full = negativity_filtered_ab(&j, 1.0, 1.0, 1e6).unwrap();
        assert!(
            (full - unfiltered).abs() < 1e-6,
            "full-window {full} vs unfiltered {unfiltered}"
        );
        let full_a = negativity_filtered_a(&j, 1.0, 1e6).unwrap();
        assert!((full_a - unfiltered).abs() < 1e-6);
    }

    #[test]
    fn filtered_verbatim_matches_windowed_schmidt() {
        let m = model(0.0, 1.68);
        let j = joint(&m, 65);
        for de in [2.0, 5.0] {
            let (verbatim, via_schmidt) =
                negativity_filtered_ab_crosscheck(&j, 1.0, 1.0, de).unwrap();
            assert!(
                (verbatim - via_schmidt).abs() < 1e-9,
                "verbatim {verbatim} vs schmidt {via_schmidt}"
            );
        }
    }

    #[test]
    fn empty_window_is_reported() {
        let m = model(0.0, 0.0);
        let j = joint(&m, 65);
        // a window far outside the populated region
        let err = negativity_filtered_ab(&j, 1e3, 1e3, 0.5);
        assert!(matches!(err, Err(Error::EmptyWindow { .. })));
    }

    #[test]
    fn fine_window_matches_grid_window_when_wide() {
        // broad spectral features so both quadratures converge: strong pump
        // with continuum dipole-dipole damping
        let raw = realize_raw(
            &FanoParams::symmetric(1.0, 1.0, 100.0, 3.0),
            &ScaleHints::default(),
        )
        .unwrap();
        let m = Model::new(raw).unwrap();
        let g = EnergyGrid::for_model(&m, 129, 12.0).unwrap();
        let j = sample_joint(&m, &g, true);
        // window wide enough for both evaluations to resolve it
        let de = 1.5;
        let coarse = negativity_filtered_ab(&j, 1.0, 1.0, de).unwrap();
        let fine = negativity_filtered_ab_fine(&m, &g, 1.0, 1.0, de, 33).unwrap();
        // node-based windows overhang by up to half a cell, so the two
        // evaluations integrate slightly different windows
        assert!((coarse - fine).abs() < 1e-2, "coarse {coarse} vs fine {fine}");
    }

    #[test]
    fn widening_window_does_not_decrease_entanglement() {
        let m = model(1.0, 0.0);
        let g = EnergyGrid::for_model(&m, 129, 12.0).unwrap();
        let mut last = -1.0;
        for de in [0.005, 0.01, 0.02] {
            let n = negativity_filtered_ab_fine(&m, &g, 1.0, 1.0, de, 17).unwrap();
            assert!(n >= last - 1e-3, "N_ab({de}) = {n} < {last}");
            last = n;
        }
    }

    #[test]
    fn qubit_continuum_routes() {
        // separable: d1 = 0
        let axis: Vec<f64> = (0..257).map(|k| -8.0 + 16.0 * k as f64 / 256.0).collect();
        let mut w = vec![16.0 / 256.0; 257];
        w[0] *= 0.5;
        w[256] *= 0.5;
        let norm: f64 = axis
            .iter()
            .zip(&w)
            .map(|(&e, &wi)| wi / (e * e + 1.0))
            .sum::<f64>();
        let scale = norm.sqrt();
        let d0 = move |e: f64| C64::new(1.0, 0.0) / C64::new(e, 1.0) / scale;
        let zero = |_: f64| C64::new(0.0, 0.0);
        let nq = qubit_continuum_negativity(&d0, &zero, &axis, &w).unwrap();
        assert!(nq.direct.abs() < 1e-10);

        // disjoint equal-weight supports: maximally entangled qubit pair
        let g0 = |e: f64| C64::new((-(e - 3.0) * (e - 3.0) * 8.0).exp(), 0.0);
        let g1 = |e: f64| C64::new((-(e + 3.0) * (e + 3.0) * 8.0).exp(), 0.0);
        let raw_norm: f64 = axis
            .iter()
            .zip(&w)
            .map(|(&e, &wi)| wi * (g0(e).norm_sqr() + g1(e).norm_sqr()))
            .sum();
        let s = raw_norm.sqrt();
        let d0b = move |e: f64| g0(e) / s;
        let d1b = move |e: f64| g1(e) / s;
        let nq2 = qubit_continuum_negativity(&d0b, &d1b, &axis, &w).unwrap();
        assert_relative_eq!(nq2.direct, 1.0, max_relative = 1e-8);
        assert!((nq2.direct - nq2.via_density).abs() < 1e-8);

        // density route equals direct route on a generic state
        let h0 = move |e: f64| C64::new(1.0, 0.3 * e) / C64::new(e - 0.5, 1.2);
        let h1 = move |e: f64| C64::new(0.4, -0.2) / C64::new(e + 0.8, 0.7);
        let raw: f64 = axis
            .iter()
            .zip(&w)
            .map(|(&e, &wi)| wi * (h0(e).norm_sqr() + h1(e).norm_sqr()))
            .sum();
        let s2 = raw.sqrt();
        let f0 = move |e: f64| h0(e) / s2;
        let f1 = move |e: f64| h1(e) / s2;
        let nq3 = qubit_continuum_negativity(&f0, &f1, &axis, &w).unwrap();
        assert!((nq3.direct - nq3.via_density).abs() < 1e-8);
        assert!(nq3.direct > 0.0 && nq3.direct < 2.0);
        // density bounds
        for (e, ep) in [(0.3, -0.4), (1.0, 1.0), (-2.0, 5.0)] {
            let nv = qubit_negativity_density(&f0, &f1, e, ep);
            assert!((0.0..=1.0).contains(&nv), "density {nv} out of bounds");
        }

        // un-normalized input is rejected
        let bad = |_: f64| C64::new(1.0, 0.0);
        assert!(matches!(
            qubit_continuum_negativity(&bad, &zero, &axis, &w),
            Err(Error::NotNormalized { .. })
        ));
    }
}

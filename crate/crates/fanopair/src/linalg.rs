//! Self-contained dense linear algebra.
//!
//! Two solvers carry the numerical weight of the crate and both come with
//! residual-style tests instead of external dependencies:
//!
//! - eigenvalues of large complex Hermitian matrices (Schmidt spectra of
//!   gridded kernels), via Householder reduction to real tridiagonal form
//!   followed by implicit-shift QL;
//! - roots of low-degree complex polynomials (characteristic quartic of the
//!   effective non-Hermitian 4x4), via simultaneous Durand-Kerner iteration
//!   with guarded Newton polish.

use rayon::prelude::*;

use crate::smallmat::{
    m4_add, m4_identity, m4_mul, m4_scale, m4_trace, M4, ONE, V4, ZERO,
};
use crate::util::Grid2;
use crate::{C64, Error, Result};

/// Eigenvalues (ascending) of a complex Hermitian matrix.
///
/// Only the Hermitian part of the input is referenced in exact arithmetic;
/// callers are expected to pass genuinely Hermitian data.
pub fn hermitian_eigenvalues(h: &Grid2<C64>) -> Result<Vec<f64>> {
    let n = h.rows();
    assert_eq!(n, h.cols(), "matrix must be square");
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a: Vec<C64> = h.as_slice().to_vec();
    let (mut d, mut e) = householder_tridiagonalize(&mut a, n);
    tql_values(&mut d, &mut e)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// In-place Householder reduction of a Hermitian matrix to tridiagonal form.
/// Returns the real diagonal `d` and subdiagonal magnitudes `e`
/// (`e[i]` sits between rows `i` and `i+1`; `e[n-1]` is a zero sentinel).
fn householder_tridiagonalize(a: &mut [C64], n: usize) -> (Vec<f64>, Vec<f64>) {
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut sigma2 = 0.0;
        for i in k + 1..n {
            sigma2 += a[i * n + k].norm_sqr();
        }
        let v0 = a[(k + 1) * n + k];
        // Nothing below the first subdiagonal entry: column already reduced.
        if sigma2 - v0.norm_sqr() <= f64::EPSILON * f64::EPSILON * sigma2 {
            continue;
        }
        let sigma = sigma2.sqrt();
        let phase = if v0.norm() > 0.0 { v0 / v0.norm() } else { ONE };
        let mut w: Vec<C64> = (k + 1..n).map(|i| a[i * n + k]).collect();
        w[0] += phase * sigma;
        let tau = 1.0 / (sigma2 + sigma * v0.norm());

        // p = tau * A_sub w over the trailing block.
        let p: Vec<C64> = (0..m)
            .into_par_iter()
            .map(|i| {
                let row = &a[(k + 1 + i) * n + k + 1..(k + 1 + i) * n + n];
                let mut s = ZERO;
                for (j, wj) in w.iter().enumerate() {
                    s += row[j] * wj;
                }
                s * tau
            })
            .collect();
        let wp: C64 = w.iter().zip(&p).map(|(wi, pi)| wi.conj() * pi).sum();
        let kk = wp * (tau * 0.5);
        let q: Vec<C64> = p.iter().zip(&w).map(|(pi, wi)| pi - kk * wi).collect();

        // Rank-2 Hermitian update A_sub <- A_sub - q w† - w q†.
        a.par_chunks_mut(n)
            .enumerate()
            .skip(k + 1)
            .for_each(|(irow, row)| {
                let i = irow - (k + 1);
                let qi = q[i];
                let wi = w[i];
                for j in 0..m {
                    row[k + 1 + j] -= qi * w[j].conj() + wi * q[j].conj();
                }
            });

        a[(k + 1) * n + k] = -phase * sigma;
        for i in k + 2..n {
            a[i * n + k] = ZERO;
        }
    }
    let d: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    let mut e = vec![0.0; n];
    for i in 0..n - 1 {
        e[i] = a[(i + 1) * n + i].norm();
    }
    (d, e)
}

/// Implicit-shift QL iteration on a real symmetric tridiagonal matrix,
/// eigenvalues only. `e[i]` couples rows `i` and `i+1`.
fn tql_values(d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 80 {
                return Err(Error::NoConvergence("tridiagonal QL"));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Cyclic Jacobi diagonalization of a real symmetric matrix.
/// Returns eigenvalues (ascending) and the matching eigenvector columns.
pub fn jacobi_symmetric(a_in: &Grid2<f64>) -> (Vec<f64>, Grid2<f64>) {
    let n = a_in.rows();
    assert_eq!(n, a_in.cols());
    let mut a = a_in.clone();
    let mut v = Grid2::<f64>::zeros(n, n);
    for i in 0..n {
        *v.get_mut(i, i) = 1.0;
    }
    let frob: f64 = a.as_slice().iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a.get(p, q) * a.get(p, q);
            }
        }
        if off.sqrt() <= 1e-15 * frob.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = *a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = *a.get(k, p);
                    let akq = *a.get(k, q);
                    *a.get_mut(k, p) = c * akp - s * akq;
                    *a.get_mut(k, q) = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = *a.get(p, k);
                    let aqk = *a.get(q, k);
                    *a.get_mut(p, k) = c * apk - s * aqk;
                    *a.get_mut(q, k) = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = *v.get(k, p);
                    let vkq = *v.get(k, q);
                    *v.get_mut(k, p) = c * vkp - s * vkq;
                    *v.get_mut(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).total_cmp(a.get(j, j)));
    let vals: Vec<f64> = order.iter().map(|&i| *a.get(i, i)).collect();
    let mut vecs = Grid2::<f64>::zeros(n, n);
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            *vecs.get_mut(k, new) = *v.get(k, old);
        }
    }
    (vals, vecs)
}

/// Roots of the monic polynomial `z^n + c[n-1] z^(n-1) + ... + c[0]` by
/// Durand-Kerner iteration with a guarded Newton polish.
pub fn poly_roots(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len();
    if n == 0 {
        return Vec::new();
    }
    let radius = 1.0 + coeffs.iter().map(|c| c.norm()).fold(0.0_f64, f64::max);
    let eval = |z: C64| -> C64 {
        let mut p = ONE;
        for c in coeffs.iter().rev() {
            p = p * z + c;
        }
        p
    };
    let eval_deriv = |z: C64| -> C64 {
        let mut dp = ZERO;
        let mut p = ONE;
        for c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        dp
    };
    // Asymmetric start angles avoid symmetric stagnation.
    let mut z: Vec<C64> = (0..n)
        .map(|k| {
            C64::from_polar(
                radius,
                2.0 * std::f64::consts::PI * (k as f64 + 0.353) / n as f64,
            )
        })
        .collect();
    for _ in 0..600 {
        let mut step_max = 0.0_f64;
        for i in 0..n {
            let mut denom = ONE;
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() < 1e-300 {
                denom = C64::new(1e-300, 0.0);
            }
            let dz = eval(z[i]) / denom;
            z[i] -= dz;
            step_max = step_max.max(dz.norm());
        }
        if step_max < 1e-16 * radius {
            break;
        }
    }
    // Newton polish, accepted only when it reduces |p|.
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let p = eval(*zi);
            let dp = eval_deriv(*zi);
            if dp.norm() < 1e-280 {
                break;
            }
            let cand = *zi - p / dp;
            if eval(cand).norm() < p.norm() {
                *zi = cand;
            } else {
                break;
            }
        }
    }
    z
}

/// Refine a root of multiplicity `mult` of the monic polynomial given by
/// low-order coefficients `coeffs` (leading coefficient 1). A root of
/// multiplicity m is a simple root of the (m-1)-th derivative, where Newton
/// iteration is quadratically convergent; this recovers full accuracy for
/// cluster means produced by simultaneous iteration.
pub fn refine_root(coeffs: &[C64], z0: C64, mult: usize) -> C64 {
    let n = coeffs.len();
    if mult == 0 || mult > n {
        return z0;
    }
    // Ascending coefficients of the full monic polynomial, then derive.
    let mut q: Vec<C64> = coeffs.to_vec();
    q.push(ONE);
    for _ in 1..mult {
        q = q
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| *c * k as f64)
            .collect();
    }
    let eval = |z: C64| -> (C64, C64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for c in q.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let mut z = z0;
    for _ in 0..12 {
        let (p, dp) = eval(z);
        if dp.norm() < 1e-280 {
            break;
        }
        let step = p / dp;
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Coefficients `[c0, c1, c2, c3]` of the characteristic polynomial
/// `det(z I - M) = z^4 + c3 z^3 + c2 z^2 + c1 z + c0`
/// by the Faddeev-LeVerrier recursion.
pub fn char_poly4(m: &M4) -> [C64; 4] {
    let i4 = m4_identity();
    let c3 = -m4_trace(m);
    let b1 = m4_add(m, &m4_scale(c3, &i4));
    let mb1 = m4_mul(m, &b1);
    let c2 = -m4_trace(&mb1) * 0.5;
    let b2 = m4_add(&mb1, &m4_scale(c2, &i4));
    let mb2 = m4_mul(m, &b2);
    let c1 = -m4_trace(&mb2) / 3.0;
    let b3 = m4_add(&mb2, &m4_scale(c1, &i4));
    let mb3 = m4_mul(m, &b3);
    let c0 = -m4_trace(&mb3) * 0.25;
    [c0, c1, c2, c3]
}

/// Orthonormal basis of the (numerical) null space of a 4x4 matrix.
/// Entries are declared negligible below `tol` (absolute, caller-scaled).
pub fn null_space4(m: &M4, tol: f64) -> Vec<V4> {
    let mut a = *m;
    let mut col_of = [0_usize, 1, 2, 3];
    let mut rank = 0;
    for step in 0..4 {
        let mut piv = (step, step);
        let mut piv_mag = 0.0;
        for i in step..4 {
            for j in step..4 {
                let mag = a[i][j].norm();
                if mag > piv_mag {
                    piv_mag = mag;
                    piv = (i, j);
                }
            }
        }
        if piv_mag <= tol {
            break;
        }
        a.swap(step, piv.0);
        for row in a.iter_mut() {
            row.swap(step, piv.1);
        }
        col_of.swap(step, piv.1);
        let d = a[step][step];
        for j in 0..4 {
            a[step][j] /= d;
        }
        for i in 0..4 {
            if i == step {
                continue;
            }
            let f = a[i][step];
            if f == ZERO {
                continue;
            }
            for j in 0..4 {
                let s = a[step][j];
                a[i][j] -= f * s;
            }
        }
        rank = step + 1;
    }
    let mut basis = Vec::new();
    for free in rank..4 {
        let mut v: V4 = [ZERO; 4];
        v[col_of[free]] = ONE;
        for (pivot_row, item) in col_of.iter().enumerate().take(rank) {
            v[*item] = -a[pivot_row][free];
        }
        basis.push(v);
    }
    // Modified Gram-Schmidt keeps the basis well conditioned.
    let mut ortho: Vec<V4> = Vec::with_capacity(basis.len());
    for mut v in basis {
        for u in &ortho {
            let proj = crate::smallmat::v4_dot(u, &v);
            for i in 0..4 {
                v[i] -= proj * u[i];
            }
        }
        let nrm = crate::smallmat::v4_norm_sq(&v).sqrt();
        if nrm > 1e-12 {
            for x in v.iter_mut() {
                *x /= nrm;
            }
            ortho.push(v);
        }
    }
    ortho
}

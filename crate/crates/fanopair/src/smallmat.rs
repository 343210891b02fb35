//! Fixed-size complex vectors and matrices for the discrete sector.
//!
//! The model only ever needs 2x2, 4x2 and 4x4 complex matrices, so these are
//! plain nested arrays with free functions instead of a general matrix type.
//! Inner products conjugate the left argument.

use crate::C64;

pub type V2 = [C64; 2];
pub type V4 = [C64; 4];
/// Row-major 2x2.
pub type M2 = [[C64; 2]; 2];
/// Row-major 4x4.
pub type M4 = [[C64; 4]; 4];
/// Row-major 4x2 (couples the 4-dim discrete sector to a 2-dim one).
pub type M42 = [[C64; 2]; 4];
/// Row-major 2x4, adjoint shape of [`M42`].
pub type M24 = [[C64; 4]; 2];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

// ---------------------------------------------------------------- vectors

pub fn v2_zero() -> V2 {
    [ZERO; 2]
}

pub fn v4_zero() -> V4 {
    [ZERO; 4]
}

/// Conjugating inner product `a† b`.
pub fn v2_dot(a: &V2, b: &V2) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

pub fn v4_dot(a: &V4, b: &V4) -> C64 {
    (0..4).map(|i| a[i].conj() * b[i]).sum()
}

pub fn v2_norm_sq(a: &V2) -> f64 {
    a[0].norm_sqr() + a[1].norm_sqr()
}

pub fn v4_norm_sq(a: &V4) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

pub fn v2_scale(s: C64, a: &V2) -> V2 {
    [s * a[0], s * a[1]]
}

pub fn v4_scale(s: C64, a: &V4) -> V4 {
    [s * a[0], s * a[1], s * a[2], s * a[3]]
}

pub fn v2_add(a: &V2, b: &V2) -> V2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn v4_sub(a: &V4, b: &V4) -> V4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

// --------------------------------------------------------------- matrices

pub fn m2_zero() -> M2 {
    [[ZERO; 2]; 2]
}

pub fn m2_identity() -> M2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn m4_zero() -> M4 {
    [[ZERO; 4]; 4]
}

pub fn m4_identity() -> M4 {
    let mut m = m4_zero();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn m2_add(a: &M2, b: &M2) -> M2 {
    let mut r = m2_zero();
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][j] + b[i][j];
        }
    }
    r
}

pub fn m2_sub(a: &M2, b: &M2) -> M2 {
    let mut r = m2_zero();
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][j] - b[i][j];
        }
    }
    r
}

pub fn m2_scale(s: C64, a: &M2) -> M2 {
    let mut r = m2_zero();
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = s * a[i][j];
        }
    }
    r
}

pub fn m2_mul(a: &M2, b: &M2) -> M2 {
    let mut r = m2_zero();
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

pub fn m2_matvec(a: &M2, v: &V2) -> V2 {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

pub fn m2_trace(a: &M2) -> C64 {
    a[0][0] + a[1][1]
}

pub fn m2_det(a: &M2) -> C64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// Outer product `v w†` as a 2x2 matrix.
pub fn m2_outer(v: &V2, w: &V2) -> M2 {
    let mut r = m2_zero();
    for i in 0..2 {
        for j in 0..2 {
            r[i][j] = v[i] * w[j].conj();
        }
    }
    r
}

pub fn m2_frob_norm(a: &M2) -> f64 {
    a.iter()
        .flatten()
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn m4_add(a: &M4, b: &M4) -> M4 {
    let mut r = m4_zero();
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = a[i][j] + b[i][j];
        }
    }
    r
}

pub fn m4_sub(a: &M4, b: &M4) -> M4 {
    let mut r = m4_zero();
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = a[i][j] - b[i][j];
        }
    }
    r
}

pub fn m4_scale(s: C64, a: &M4) -> M4 {
    let mut r = m4_zero();
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = s * a[i][j];
        }
    }
    r
}

pub fn m4_mul(a: &M4, b: &M4) -> M4 {
    let mut r = m4_zero();
    for i in 0..4 {
        for j in 0..4 {
            let mut s = ZERO;
            for (k, bk) in b.iter().enumerate() {
                s += a[i][k] * bk[j];
            }
            r[i][j] = s;
        }
    }
    r
}

pub fn m4_matvec(a: &M4, v: &V4) -> V4 {
    let mut r = v4_zero();
    for i in 0..4 {
        for j in 0..4 {
            r[i] += a[i][j] * v[j];
        }
    }
    r
}

pub fn m4_trace(a: &M4) -> C64 {
    a[0][0] + a[1][1] + a[2][2] + a[3][3]
}

pub fn m4_adjoint(a: &M4) -> M4 {
    let mut r = m4_zero();
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = a[j][i].conj();
        }
    }
    r
}

pub fn m4_frob_norm(a: &M4) -> f64 {
    a.iter()
        .flatten()
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `a b` for a 4x4 times a 4x2.
pub fn m4_mul_m42(a: &M4, b: &M42) -> M42 {
    let mut r = [[ZERO; 2]; 4];
    for i in 0..4 {
        for j in 0..2 {
            let mut s = ZERO;
            for (k, bk) in b.iter().enumerate() {
                s += a[i][k] * bk[j];
            }
            r[i][j] = s;
        }
    }
    r
}

/// Adjoint of a 4x2 as an explicit 2x4.
pub fn m42_adjoint(a: &M42) -> M24 {
    let mut r = [[ZERO; 4]; 2];
    for i in 0..2 {
        for j in 0..4 {
            r[i][j] = a[j][i].conj();
        }
    }
    r
}

/// `a b` for a 4x2 times a 2x4, giving a 4x4.
pub fn m42_mul_m24(a: &M42, b: &M24) -> M4 {
    let mut r = m4_zero();
    for i in 0..4 {
        for j in 0..4 {
            r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    r
}

/// `a v` for a 2x4 times a 4-vector.
pub fn m24_matvec(a: &M24, v: &V4) -> V2 {
    let mut r = v2_zero();
    for i in 0..2 {
        for j in 0..4 {
            r[i] += a[i][j] * v[j];
        }
    }
    r
}

/// Gauss-Jordan inverse with partial pivoting; `None` when singular to
/// machine precision.
pub fn m4_inverse(a: &M4) -> Option<M4> {
    let mut w = *a;
    let mut inv = m4_identity();
    for col in 0..4 {
        let (piv, piv_mag) = (col..4)
            .map(|r| (r, w[r][col].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if piv_mag < 1e-300 {
            return None;
        }
        w.swap(col, piv);
        inv.swap(col, piv);
        let d = w[col][col];
        for j in 0..4 {
            w[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..4 {
            if r == col {
                continue;
            }
            let f = w[r][col];
            if f == ZERO {
                continue;
            }
            for j in 0..4 {
                let wc = w[col][j];
                let ic = inv[col][j];
                w[r][j] -= f * wc;
                inv[r][j] -= f * ic;
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let a: M4 = [
            [c(1.0, 0.2), c(0.3, -0.4), cr(0.0), c(2.0, 1.0)],
            [c(-1.0, 0.0), c(0.5, 0.5), c(0.1, 0.0), cr(0.0)],
            [c(0.0, 1.5), cr(2.0), c(1.0, -1.0), c(0.2, 0.2)],
            [cr(0.7), c(0.0, -0.3), c(1.1, 0.4), c(3.0, 0.0)],
        ];
        let inv = m4_inverse(&a).expect("invertible");
        let prod = m4_mul(&a, &inv);
        let err = m4_frob_norm(&m4_sub(&prod, &m4_identity()));
        assert!(err < 1e-12, "inverse residual {err}");
    }

    #[test]
    fn singular_matrix_detected() {
        let mut a = m4_zero();
        a[0][0] = ONE;
        a[1][1] = ONE;
        a[2][2] = ONE;
        assert!(m4_inverse(&a).is_none());
    }
}

//! Human-readable diagnostics report: matrices, eigensystems, norms and
//! consistency residuals for one parameter set.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use fanopair::dynamics::Model;
use fanopair::fano::{balance_residual, dressed};
use fanopair::oracle::{crossterm_residual, product_reference};
use fanopair::params::{derive_fano, Atom};
use fanopair::smallmat::{m2_frob_norm, m2_identity, m2_mul, m2_sub, M2, M4};
use fanopair::spectra::{quadrature_norm, sample_joint, EnergyGrid};
use fanopair::C64;

use crate::output::CsvWriter;

fn fmt_c(z: C64) -> String {
    format!("{:+.6e}{:+.6e}i", z.re, z.im)
}

fn fmt_m2(name: &str, m: &M2, out: &mut String) {
    writeln!(out, "  {name}:").unwrap();
    for row in m {
        writeln!(out, "    [{} , {}]", fmt_c(row[0]), fmt_c(row[1])).unwrap();
    }
}

fn fmt_m4(name: &str, m: &M4, out: &mut String) {
    writeln!(out, "  {name}:").unwrap();
    for row in m {
        writeln!(
            out,
            "    [{} , {} , {} , {}]",
            fmt_c(row[0]),
            fmt_c(row[1]),
            fmt_c(row[2]),
            fmt_c(row[3])
        )
        .unwrap();
    }
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "[ok]"
    } else {
        "[VIOLATION]"
    }
}

/// Assemble the report text; also returns it for printing.
pub fn build(model: &Model, grid: &EnergyGrid) -> Result<String> {
    let mut s = String::new();
    let raw = model.raw();
    writeln!(s, "== parameter set ==")?;
    writeln!(s, "  E_a0 = {}, E_b0 = {}, E_L = {}", raw.e_a0, raw.e_b0, raw.e_l)?;
    writeln!(s, "  mu_a = {}, mu_b = {}", fmt_c(raw.mu_a), fmt_c(raw.mu_b))?;
    writeln!(s, "  mut_a = {}, mut_b = {}", fmt_c(raw.mut_a), fmt_c(raw.mut_b))?;
    writeln!(s, "  V_a = {}, V_b = {}", fmt_c(raw.v_a), fmt_c(raw.v_b))?;
    writeln!(
        s,
        "  J_a = {}, J_b = {}, J_ab = {}",
        fmt_c(raw.j_a),
        fmt_c(raw.j_b),
        fmt_c(raw.j_ab)
    )?;
    writeln!(s, "  alpha_L = {}", fmt_c(raw.alpha_l))?;

    let report = raw.validate();
    if report.is_ok() {
        writeln!(s, "  validation: ok")?;
    } else {
        for issue in &report.issues {
            writeln!(s, "  validation: {issue}")?;
        }
    }

    let fano = derive_fano(raw);
    writeln!(s, "\n== Fano-style parameters ==")?;
    writeln!(s, "  gamma = ({}, {})", fano.gamma_a, fano.gamma_b)?;
    writeln!(s, "  gammabar = ({}, {})", fano.gammabar_a, fano.gammabar_b)?;
    writeln!(s, "  Gamma = ({}, {})", fano.gamma_tot_a, fano.gamma_tot_b)?;
    if let (Some(qa), Some(qb)) = (fano.q_a, fano.q_b) {
        writeln!(s, "  q = ({}, {})", fmt_c(qa), fmt_c(qb))?;
    }
    if let Some(omega) = fano.pump_avg {
        writeln!(s, "  |Omega| = {}", omega.norm())?;
    }

    let mats = model.matrices();
    writeln!(s, "\n== structured matrices ==")?;
    fmt_m4("discrete block", &mats.discrete, &mut s);
    fmt_m4("effective (damped) block", &mats.effective, &mut s);
    fmt_m2("damped 2x2, atom a", &mats.damped_a, &mut s);
    fmt_m2("damped 2x2, atom b", &mats.damped_b, &mut s);

    writeln!(s, "\n== eigensystems ==")?;
    for which in [Atom::A, Atom::B] {
        let eig = model.eig_damped(which);
        for (k, lam) in eig.values.iter().enumerate() {
            writeln!(
                s,
                "  lambda_{}^{} = {}  Im >= 0 {}",
                k + 1,
                which.label(),
                fmt_c(*lam),
                flag(lam.im >= -1e-12)
            )?;
        }
        let sum = m2_sub(
            &fanopair::smallmat::m2_add(&eig.projectors[0], &eig.projectors[1]),
            &m2_identity(),
        );
        let cross = m2_mul(&eig.projectors[0], &eig.projectors[1]);
        writeln!(
            s,
            "  projector algebra ({}): completeness {:.2e}, orthogonality {:.2e} {}",
            which.label(),
            m2_frob_norm(&sum),
            m2_frob_norm(&cross),
            flag(m2_frob_norm(&sum).max(m2_frob_norm(&cross)) < 1e-10)
        )?;
    }
    let eig4 = model.eig_effective();
    for (k, lam) in eig4.values.iter().enumerate() {
        writeln!(
            s,
            "  Lambda_{} = {}  Im <= 0 {}",
            k + 1,
            fmt_c(*lam),
            flag(lam.im <= 1e-12)
        )?;
    }
    writeln!(s, "  eigenvector condition estimate: {:.3e}", eig4.cond_estimate)?;

    writeln!(s, "\n== norms ==")?;
    let analytic = model.norm_analytic()?;
    writeln!(
        s,
        "  analytic long-time norm = {analytic:.12} {}",
        flag((analytic - 1.0).abs() < 1e-6)
    )?;
    let quad = quadrature_norm(model, grid);
    writeln!(
        s,
        "  quadrature norm on working grid ({} pts, half-widths {:.3}/{:.3}) = {quad:.8}",
        grid.points(),
        grid.half_width(Atom::A),
        grid.half_width(Atom::B)
    )?;
    let joint = sample_joint(model, grid, false);
    writeln!(s, "  boundary/peak intensity ratio = {:.3e}", joint.boundary_ratio)?;

    writeln!(s, "\n== consistency checks ==")?;
    if raw.uncoupled() {
        let product = product_reference(raw, grid, false)?;
        let mut worst = 0.0_f64;
        let mut max_amp = 0.0_f64;
        for (p, f) in product.amplitude.as_slice().iter().zip(joint.amplitude.as_slice()) {
            worst = worst.max((p - f).norm());
            max_amp = max_amp.max(f.norm());
        }
        let rel = worst / max_amp.max(1e-300);
        writeln!(
            s,
            "  factorization against isolated-atom product: max defect {rel:.3e} {}",
            if rel < 1e-8 { "PASS" } else { "FAIL" }
        )?;
    } else {
        writeln!(s, "  factorization check skipped (dipole-dipole coupling present)")?;
    }
    let eps = [C64::new(0.0, 0.4), C64::new(0.8, 0.3), C64::new(-0.5, 0.7)];
    let resid = crossterm_residual(model, &[0.2, 0.9, 1.4], &eps)?;
    writeln!(s, "  product-ansatz cross-coupling defect = {resid:.3e}")?;
    match balance_residual(raw) {
        Ok(b) => writeln!(s, "  channel-balance residual = {} (|.| = {:.3e})", fmt_c(b), b.norm())?,
        Err(e) => writeln!(s, "  channel-balance residual unavailable: {e}")?,
    }
    if let Ok(d) = dressed(raw) {
        if let (Ok(ea), Ok(eb)) = (d.fano_zero(Atom::A), d.fano_zero(Atom::B)) {
            writeln!(s, "  Fano-zero energies: E_a^F = {ea:.6}, E_b^F = {eb:.6}")?;
        }
    }
    Ok(s)
}

/// Flat CSV dump of all structured matrices for external cross-checking.
pub fn matrices_csv(model: &Model, path: &Path) -> Result<()> {
    let mats = model.matrices();
    let mut csv = CsvWriter::new(&["matrix", "row", "col", "re", "im"]);
    csv.meta("command", "report");
    let push4 = |name: &str, m: &M4, csv: &mut CsvWriter| {
        for (i, row) in m.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                csv.row_mixed(vec![
                    name.to_string(),
                    i.to_string(),
                    j.to_string(),
                    crate::output::fmt_float(z.re),
                    crate::output::fmt_float(z.im),
                ]);
            }
        }
    };
    push4("discrete", &mats.discrete, &mut csv);
    push4("effective", &mats.effective, &mut csv);
    for (name, m) in [
        ("bound_a", &mats.bound_a),
        ("bound_b", &mats.bound_b),
        ("damped_a", &mats.damped_a),
        ("damped_b", &mats.damped_b),
    ] {
        for (i, row) in m.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                csv.row_mixed(vec![
                    name.to_string(),
                    i.to_string(),
                    j.to_string(),
                    crate::output::fmt_float(z.re),
                    crate::output::fmt_float(z.im),
                ]);
            }
        }
    }
    for (name, m) in [("ion_a", &mats.ion_a), ("ion_b", &mats.ion_b)] {
        for (i, row) in m.iter().enumerate() {
            for (j, z) in row.iter().enumerate() {
                csv.row_mixed(vec![
                    name.to_string(),
                    i.to_string(),
                    j.to_string(),
                    crate::output::fmt_float(z.re),
                    crate::output::fmt_float(z.im),
                ]);
            }
        }
    }
    for (name, v) in [("chan_a", &mats.chan_a), ("chan_b", &mats.chan_b)] {
        for (i, z) in v.iter().enumerate() {
            csv.row_mixed(vec![
                name.to_string(),
                i.to_string(),
                "0".to_string(),
                crate::output::fmt_float(z.re),
                crate::output::fmt_float(z.im),
            ]);
        }
    }
    csv.write(path)?;
    Ok(())
}

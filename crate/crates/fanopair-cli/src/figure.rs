//! Dataset emission for the named figure presets.

use std::path::PathBuf;

use anyhow::Result;
use fanopair::dynamics::Model;
use fanopair::entanglement::{
    negativity_filtered_a_fine, negativity_filtered_ab_fine, negativity_schmidt, schmidt,
};
use fanopair::params::{derive_fano, Atom};
use fanopair::presets::{Figure, FigurePreset};
use fanopair::spectra::{covariance, marginal_at, sample_joint, EnergyGrid};

use crate::output::{write_plot_script, CsvWriter, PlotKind};
use crate::setspec::GridSpec;

pub struct FigureOptions {
    pub out: PathBuf,
    pub grid: GridSpec,
    pub plot: bool,
    pub tolerance: Option<f64>,
}

/// Narrowest damped linewidth over the grid spacing; below ~1 the grid
/// cannot represent part of the spectrum and derived numbers degrade.
fn resolved_cells(model: &Model, grid: &EnergyGrid) -> f64 {
    let mut w = f64::INFINITY;
    for lam in model.eig_effective().values {
        if lam.im.abs() > 1e-12 {
            w = w.min(lam.im.abs());
        }
    }
    for which in [Atom::A, Atom::B] {
        for lam in model.eig_damped(which).values {
            if lam.im.abs() > 1e-12 {
                w = w.min(lam.im.abs());
            }
        }
    }
    w / grid.step(Atom::A)
}

/// Run one preset end to end. Returns `false` when a captioned-value check
/// missed its tolerance.
pub fn run(preset: &FigurePreset, opts: &FigureOptions) -> Result<bool> {
    match &preset.figure {
        Figure::Marginals { variants, points, .. } => {
            let points = opts.grid.grid_points.unwrap_or(*points);
            let models: Vec<(String, Model)> = variants
                .iter()
                .map(|(label, set)| Ok((label.clone(), set.model()?)))
                .collect::<Result<_>>()?;
            // common energy axis: the widest variant grid
            let grids: Vec<EnergyGrid> = models
                .iter()
                .map(|(_, m)| opts.grid.build(m, points))
                .collect::<Result<_>>()?;
            let widest = grids
                .iter()
                .enumerate()
                .max_by(|a, b| {
                    a.1.half_width(Atom::A).total_cmp(&b.1.half_width(Atom::A))
                })
                .map(|(i, _)| i)
                .unwrap();
            let axis = grids[widest].axis(Atom::A).to_vec();

            let mut columns: Vec<&str> = vec!["E_a"];
            let labels: Vec<String> = models.iter().map(|(l, _)| l.clone()).collect();
            for label in &labels {
                columns.push(label.as_str());
            }
            let mut csv = CsvWriter::new(&columns);
            csv.meta("preset", preset.id)
                .meta("description", preset.description)
                .meta("grid_points", points);
            let curves: Vec<Vec<f64>> = models
                .iter()
                .zip(&grids)
                .map(|((_, m), g)| {
                    axis.iter().map(|&e| marginal_at(m, g, Atom::A, e)).collect()
                })
                .collect();
            for (i, &e) in axis.iter().enumerate() {
                let mut row = vec![e];
                for curve in &curves {
                    row.push(curve[i]);
                }
                csv.row(&row);
            }
            let csv_path = opts.out.join(format!("{}_marginals.csv", preset.id));
            csv.write(&csv_path)?;
            println!("wrote {}", csv_path.display());
            if opts.plot {
                let ys = labels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (i + 1, l.clone()))
                    .collect();
                let plot_path = opts.out.join(format!("{}.gnuplot", preset.id));
                write_plot_script(
                    &plot_path,
                    &format!("{}_marginals.csv", preset.id),
                    preset.description,
                    &PlotKind::Curves { x: 0, ys },
                )?;
                println!("wrote {}", plot_path.display());
            }
            Ok(true)
        }
        Figure::JointMap { set, points, .. } => {
            let model = set.model()?;
            let grid = opts.grid.build(&model, opts.grid.grid_points.unwrap_or(*points))?;
            let joint = sample_joint(&model, &grid, true);
            let mut csv = CsvWriter::new(&["E_a", "E_b", "intensity"]);
            csv.meta("preset", preset.id)
                .meta("description", preset.description)
                .meta("grid_points", grid.points())
                .meta("norm_quadrature", crate::output::fmt_float(joint.norm_quadrature))
                .meta("boundary_ratio", crate::output::fmt_float(joint.boundary_ratio));
            let axis_a = joint.grid.axis(Atom::A);
            let axis_b = joint.grid.axis(Atom::B);
            for (i, &ea) in axis_a.iter().enumerate() {
                for (j, &eb) in axis_b.iter().enumerate() {
                    csv.row(&[ea, eb, *joint.intensity.get(i, j)]);
                }
            }
            let csv_path = opts.out.join(format!("{}_joint.csv", preset.id));
            csv.write(&csv_path)?;
            println!("wrote {}", csv_path.display());
            if opts.plot {
                let plot_path = opts.out.join(format!("{}.gnuplot", preset.id));
                write_plot_script(
                    &plot_path,
                    &format!("{}_joint.csv", preset.id),
                    preset.description,
                    &PlotKind::Map,
                )?;
                println!("wrote {}", plot_path.display());
            }
            Ok(true)
        }
        Figure::Sweep { base, param, values, points } => {
            let mut csv = CsvWriter::new(&[param.name(), "N", "C", "norm_analytic"]);
            csv.meta("preset", preset.id).meta("description", preset.description);
            for &v in values {
                let set = param.apply(*base, v);
                let model = set.model()?;
                let grid = opts.grid.build(&model, opts.grid.grid_points.unwrap_or(*points))?;
                let joint = sample_joint(&model, &grid, true);
                let n = negativity_schmidt(&schmidt(&joint)?);
                let c = covariance(&joint)?;
                csv.row(&[v, n, c, model.norm_analytic()?]);
            }
            let csv_path = opts.out.join(format!("{}_sweep.csv", preset.id));
            csv.write(&csv_path)?;
            println!("wrote {}", csv_path.display());
            if opts.plot {
                let plot_path = opts.out.join(format!("{}.gnuplot", preset.id));
                write_plot_script(
                    &plot_path,
                    &format!("{}_sweep.csv", preset.id),
                    preset.description,
                    &PlotKind::Curves {
                        x: 0,
                        ys: vec![(1, "N".into()), (2, "C".into())],
                    },
                )?;
                println!("wrote {}", plot_path.display());
            }
            Ok(true)
        }
        Figure::Lattice { base, gammabars, j_abs, points } => {
            let mut csv = CsvWriter::new(&["gammabar", "J_ab", "N"]);
            csv.meta("preset", preset.id).meta("description", preset.description);
            for &gb in gammabars {
                for &j in j_abs {
                    let set = base.with_gammabar(gb).with_j_ab(j);
                    let model = set.model()?;
                    let grid =
                        opts.grid.build(&model, opts.grid.grid_points.unwrap_or(*points))?;
                    let joint = sample_joint(&model, &grid, true);
                    let n = negativity_schmidt(&schmidt(&joint)?);
                    csv.row(&[gb, j, n]);
                }
            }
            let csv_path = opts.out.join(format!("{}_lattice.csv", preset.id));
            csv.write(&csv_path)?;
            println!("wrote {}", csv_path.display());
            if opts.plot {
                let plot_path = opts.out.join(format!("{}.gnuplot", preset.id));
                write_plot_script(
                    &plot_path,
                    &format!("{}_lattice.csv", preset.id),
                    preset.description,
                    &PlotKind::Map,
                )?;
                println!("wrote {}", plot_path.display());
            }
            Ok(true)
        }
        Figure::FilteredMap {
            set,
            half_window,
            expected_n,
            points,
            map_points,
            map_extent,
            win_points,
        } => {
            let model = set.model()?;
            let grid = opts.grid.build(&model, opts.grid.grid_points.unwrap_or(*points))?;
            let joint = sample_joint(&model, &grid, true);
            let spectrum = schmidt(&joint)?;
            let n = negativity_schmidt(&spectrum);
            let ok = check_expected(preset.id, n, *expected_n, opts.tolerance);
            write_schmidt(preset.id, &spectrum, opts)?;

            let fano = derive_fano(model.raw());
            let center = model.raw().e_a0;
            let extent = map_extent * fano.gamma_tot_a;
            let mut csv = CsvWriter::new(&["E_a0", "E_b0", "N_ab"]);
            csv.meta("preset", preset.id)
                .meta("description", preset.description)
                .meta("half_window", crate::output::fmt_float(*half_window))
                .meta("N_unfiltered", crate::output::fmt_float(n));
            for i in 0..*map_points {
                let ea0 = center - extent + 2.0 * extent * i as f64 / (*map_points - 1) as f64;
                for j in 0..*map_points {
                    let eb0 =
                        center - extent + 2.0 * extent * j as f64 / (*map_points - 1) as f64;
                    let value = negativity_filtered_ab_fine(
                        &model,
                        &grid,
                        ea0,
                        eb0,
                        *half_window,
                        *win_points,
                    )
                    .unwrap_or(0.0);
                    csv.row(&[ea0, eb0, value]);
                }
            }
            let csv_path = opts.out.join(format!("{}_map.csv", preset.id));
            csv.write(&csv_path)?;
            println!("wrote {}", csv_path.display());
            if opts.plot {
                let plot_path = opts.out.join(format!("{}.gnuplot", preset.id));
                write_plot_script(
                    &plot_path,
                    &format!("{}_map.csv", preset.id),
                    preset.description,
                    &PlotKind::Map,
                )?;
                println!("wrote {}", plot_path.display());
            }
            Ok(ok)
        }
        Figure::FilteredTrace {
            set,
            half_window,
            expected_n,
            points,
            trace_points,
            trace_extent,
            win_points,
        } => {
            let model = set.model()?;
            let grid = opts.grid.build(&model, opts.grid.grid_points.unwrap_or(*points))?;
            let joint = sample_joint(&model, &grid, true);
            let spectrum = schmidt(&joint)?;
            let n = negativity_schmidt(&spectrum);
            let ok = check_expected(preset.id, n, *expected_n, opts.tolerance);
            write_schmidt(preset.id, &spectrum, opts)?;

            let fano = derive_fano(model.raw());
            let center = model.raw().e_a0;
            let extent = trace_extent * fano.gamma_tot_a;
            let mut csv = CsvWriter::new(&["E_a0", "N_a"]);
            csv.meta("preset", preset.id)
                .meta("description", preset.description)
                .meta("half_window", crate::output::fmt_float(*half_window))
                .meta("N_unfiltered", crate::output::fmt_float(n));
            for i in 0..*trace_points {
                let ea0 = center - extent + 2.0 * extent * i as f64 / (*trace_points - 1) as f64;
                let value =
                    negativity_filtered_a_fine(&model, &grid, ea0, *half_window, *win_points)
                        .unwrap_or(0.0);
                csv.row(&[ea0, value]);
            }
            let csv_path = opts.out.join(format!("{}_trace.csv", preset.id));
            csv.write(&csv_path)?;
            println!("wrote {}", csv_path.display());
            if opts.plot {
                let plot_path = opts.out.join(format!("{}.gnuplot", preset.id));
                write_plot_script(
                    &plot_path,
                    &format!("{}_trace.csv", preset.id),
                    preset.description,
                    &PlotKind::Curves { x: 0, ys: vec![(1, "N_a".into())] },
                )?;
                println!("wrote {}", plot_path.display());
            }
            Ok(ok)
        }
        Figure::Molecular { base, param, values, points } => {
            let mut csv = CsvWriter::new(&[
                param.name(),
                "N",
                "C",
                "norm_analytic",
                "resolved_cells",
            ]);
            csv.meta("preset", preset.id).meta("description", preset.description).meta(
                "note",
                "rows with resolved_cells < 1 are quadrature-limited (slow ionization)",
            );
            for &v in values {
                let raw = param.apply(*base, v);
                let model = Model::new(raw)?;
                let grid = opts.grid.build(&model, opts.grid.grid_points.unwrap_or(*points))?;
                let joint = sample_joint(&model, &grid, true);
                let n = negativity_schmidt(&schmidt(&joint)?);
                let c = covariance(&joint)?;
                csv.row(&[v, n, c, model.norm_analytic()?, resolved_cells(&model, &grid)]);
            }
            let csv_path = opts.out.join(format!("{}_sweep.csv", preset.id));
            csv.write(&csv_path)?;
            println!("wrote {}", csv_path.display());
            if opts.plot {
                let plot_path = opts.out.join(format!("{}.gnuplot", preset.id));
                write_plot_script(
                    &plot_path,
                    &format!("{}_sweep.csv", preset.id),
                    preset.description,
                    &PlotKind::Curves {
                        x: 0,
                        ys: vec![(1, "N".into()), (2, "C".into())],
                    },
                )?;
                println!("wrote {}", plot_path.display());
            }
            Ok(true)
        }
    }
}

fn check_expected(id: &str, n: f64, expected: Option<(f64, f64)>, tol_override: Option<f64>) -> bool {
    let Some((want, tol)) = expected else {
        return true;
    };
    let tol = tol_override.unwrap_or(tol);
    let ok = (n - want).abs() <= tol;
    println!(
        "{id}: N = {want} +- {tol}: computed {n:.4} -> {}",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

fn write_schmidt(
    id: &str,
    spectrum: &fanopair::entanglement::SchmidtSpectrum,
    opts: &FigureOptions,
) -> Result<()> {
    let mut csv = CsvWriter::new(&["n", "lambda"]);
    csv.meta("preset", id)
        .meta("schmidt_number", crate::output::fmt_float(spectrum.schmidt_number));
    for (i, l) in spectrum.lambdas.iter().enumerate() {
        csv.row(&[i as f64, *l]);
    }
    let path = opts.out.join(format!("{id}_schmidt.csv"));
    csv.write(&path)?;
    println!("wrote {}", path.display());
    Ok(())
}

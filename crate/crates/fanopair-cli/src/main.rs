//! Command-line front end: figure presets, sweeps, spectra, negativity
//! reports, channel-balance records and diagnostics.

mod figure;
mod output;
mod report;
mod setspec;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};

use fanopair::dynamics::Model;
use fanopair::entanglement::{
    negativity_bruteforce, negativity_schmidt, negativity_trace, schmidt,
};
use fanopair::fano::{balance_residual, balance_solve, dressed};
use fanopair::params::Atom;
use fanopair::presets::{self, MolecularParam, SweepParam};
use fanopair::spectra::{covariance, marginal, sample_joint};

use figure::FigureOptions;
use output::{out_dir, CsvWriter};
use setspec::{GridSpec, SetSpec};

#[derive(Parser)]
#[command(
    name = "fanopair",
    version,
    about = "Joint photoelectron spectra and two-electron entanglement of a \
             pair of driven, dipole-dipole-coupled auto-ionization systems"
)]
struct Cli {
    /// Output directory (default: $FANOPAIR_OUT, else ./out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also emit a gnuplot script next to each dataset
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reproduce a named figure preset (see `list`)
    Figure {
        /// Preset identifier, e.g. fig2a, fig9b, fig12
        id: String,
        #[command(flatten)]
        grid: GridSpec,
        /// Tolerance override for captioned-value checks
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// List the available figure presets
    List,
    /// Joint and marginal spectra for one parameter set
    Spectrum {
        #[command(flatten)]
        set: SetSpec,
        #[command(flatten)]
        grid: GridSpec,
    },
    /// Negativity of the two-electron state through independent routes
    Negativity {
        #[command(flatten)]
        set: SetSpec,
        #[command(flatten)]
        grid: GridSpec,
        /// Also run the O(G^4) brute-force route (grids up to 64 points)
        #[arg(long)]
        brute: bool,
    },
    /// Tabulate observables along one parameter
    Sweep {
        #[command(flatten)]
        set: SetSpec,
        #[command(flatten)]
        grid: GridSpec,
        /// Parameter to vary: gammabar, J_ab, q, Omega, mut, alpha_L
        #[arg(long)]
        param: String,
        /// Comma-separated values
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Observables: N, C, norm, norm_quad (comma-separated)
        #[arg(long, value_delimiter = ',', default_value = "N,C,norm")]
        observables: Vec<String>,
    },
    /// Fano-zero energies and the dipole-dipole channel-balance record
    Balance {
        #[command(flatten)]
        set: SetSpec,
        /// Solve for the continuum couplings that balance the channels
        #[arg(long)]
        solve: bool,
    },
    /// Full diagnostics report (matrices, eigensystems, residuals)
    Report {
        #[command(flatten)]
        set: SetSpec,
        #[command(flatten)]
        grid: GridSpec,
        /// Also dump every structured matrix to a flat CSV
        #[arg(long)]
        matrices_csv: bool,
    },
}

fn main() -> ExitCode {
    // default SIGPIPE disposition so `fanopair ... | head` exits quietly
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("captioned-value check missed its tolerance");
            ExitCode::FAILURE
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let out = out_dir(&cli.out)?;
    match cli.command {
        Command::Figure { id, grid, tolerance } => {
            let preset = presets::by_id(&id)?;
            let opts = FigureOptions { out, grid, plot: cli.plot, tolerance };
            figure::run(&preset, &opts)
        }
        Command::List => {
            for preset in presets::all() {
                println!("{:8}  {}", preset.id, preset.description);
            }
            Ok(true)
        }
        Command::Spectrum { set, grid } => {
            let model = Model::new(set.resolve()?)?;
            let g = grid.build(&model, 513)?;
            let joint = sample_joint(&model, &g, true);
            let mut csv = CsvWriter::new(&["E_a", "E_b", "intensity"]);
            csv.meta("command", "spectrum")
                .meta("grid_points", g.points())
                .meta("norm_quadrature", output::fmt_float(joint.norm_quadrature))
                .meta("boundary_ratio", output::fmt_float(joint.boundary_ratio));
            for (i, &ea) in g.axis(Atom::A).iter().enumerate() {
                for (j, &eb) in g.axis(Atom::B).iter().enumerate() {
                    csv.row(&[ea, eb, *joint.intensity.get(i, j)]);
                }
            }
            let joint_path = out.join("spectrum_joint.csv");
            csv.write(&joint_path)?;
            println!("wrote {}", joint_path.display());
            for which in [Atom::A, Atom::B] {
                let marg = marginal(&joint, which);
                let mut csv = CsvWriter::new(&["E", "intensity"]);
                csv.meta("command", "spectrum").meta("atom", which.label());
                for (e, v) in marg.axis.iter().zip(&marg.intensity) {
                    csv.row(&[*e, *v]);
                }
                let path = out.join(format!("spectrum_marginal_{}.csv", which.label()));
                csv.write(&path)?;
                println!("wrote {}", path.display());
            }
            if joint.boundary_ratio > 1e-6 {
                eprintln!(
                    "note: boundary/peak intensity ratio {:.2e} (algebraic tails truncated)",
                    joint.boundary_ratio
                );
            }
            Ok(true)
        }
        Command::Negativity { set, grid, brute } => {
            let model = Model::new(set.resolve()?)?;
            let g = grid.build(&model, 513)?;
            let joint = sample_joint(&model, &g, true);
            let spectrum = schmidt(&joint)?;
            let n_schmidt = negativity_schmidt(&spectrum);
            let trace = negativity_trace(&joint)?;
            println!("N (Schmidt route) = {n_schmidt:.6}");
            println!("N (trace route)   = {:.6}", trace.value);
            println!("Schmidt number K  = {:.4}", spectrum.schmidt_number);
            println!("route agreement   = {:.2e}", (n_schmidt - trace.value).abs());
            if brute {
                if g.points() <= 64 {
                    let nb = negativity_bruteforce(&joint)?;
                    println!("N (brute force)   = {nb:.6}");
                } else {
                    bail!("brute-force route needs --grid-points <= 64, got {}", g.points());
                }
            }
            let c = covariance(&joint)?;
            println!("covariance C      = {c:+.6}");
            let mut csv = CsvWriter::new(&["n", "lambda"]);
            csv.meta("command", "negativity")
                .meta("schmidt_number", output::fmt_float(spectrum.schmidt_number))
                .meta("N", output::fmt_float(n_schmidt));
            for (i, l) in spectrum.lambdas.iter().enumerate() {
                csv.row(&[i as f64, *l]);
            }
            let path = out.join("negativity_schmidt.csv");
            csv.write(&path)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Sweep { set, grid, param, values, observables } => {
            if values.is_empty() {
                bail!("--values must not be empty");
            }
            let base_raw = set.resolve()?;
            enum Target {
                Caption(SweepParam),
                Molecular(MolecularParam),
            }
            let target = match param.as_str() {
                "mut" => Target::Molecular(MolecularParam::DirectDipole),
                "alpha_L" | "alpha_l" => Target::Molecular(MolecularParam::PumpAmplitude),
                other => Target::Caption(SweepParam::parse(other)?),
            };
            let mut columns = vec![param.as_str()];
            for obs in &observables {
                columns.push(obs.as_str());
            }
            let mut csv = CsvWriter::new(&columns);
            csv.meta("command", "sweep").meta("param", &param);
            for &v in &values {
                let raw = match &target {
                    Target::Molecular(p) => p.apply(base_raw, v),
                    Target::Caption(p) => {
                        if set.config.is_some() {
                            bail!("caption-style sweeps need caption-style base parameters");
                        }
                        let mut base = presets::CaptionSet::base_comparable();
                        if let Some(g) = set.gamma {
                            base.gamma = g;
                        }
                        if let Some(g) = set.gammabar {
                            base.gammabar = g;
                        }
                        if let Some(q) = set.q {
                            base.q = q;
                        }
                        if let Some(o) = set.omega {
                            base.omega = o;
                        }
                        if let Some(j) = set.j_ab {
                            base.j_ab = j;
                        }
                        p.apply(base, v).raw()?
                    }
                };
                let model = Model::new(raw)?;
                let g = grid.build(&model, 385)?;
                let joint = sample_joint(&model, &g, true);
                let mut row = vec![v];
                for obs in &observables {
                    let value = match obs.as_str() {
                        "N" => negativity_schmidt(&schmidt(&joint)?),
                        "C" => covariance(&joint)?,
                        "norm" => model.norm_analytic()?,
                        "norm_quad" => joint.norm_quadrature,
                        other => bail!("unknown observable `{other}`"),
                    };
                    row.push(value);
                }
                csv.row(&row);
            }
            let path = out.join("sweep.csv");
            csv.write(&path)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Balance { set, solve } => {
            let mut raw = set.resolve()?;
            if solve {
                raw = balance_solve(&raw)?;
                println!("solved continuum couplings: J_a = J_b = {:+.6e}", raw.j_a.re);
            }
            let d = dressed(&raw)?;
            let ea = d.fano_zero(Atom::A)?;
            let eb = d.fano_zero(Atom::B)?;
            let residual = balance_residual(&raw)?;
            println!("Fano-zero energies: E_a^F = {ea:.6}, E_b^F = {eb:.6}");
            println!(
                "balance residual = {:+.6e}{:+.6e}i (|.| = {:.3e})",
                residual.re,
                residual.im,
                residual.norm()
            );
            println!(
                "dressed coupling at the zeros: |Jbar| = {:.3e}",
                d.coupling(ea, eb).norm()
            );
            let mut csv = CsvWriter::new(&[
                "E_F_a",
                "E_F_b",
                "residual_re",
                "residual_im",
                "J_a_re",
                "J_b_re",
            ]);
            csv.meta("command", "balance").meta("solved", solve);
            csv.row(&[ea, eb, residual.re, residual.im, raw.j_a.re, raw.j_b.re]);
            let path = out.join("balance.csv");
            csv.write(&path)?;
            println!("wrote {}", path.display());
            Ok(true)
        }
        Command::Report { set, grid, matrices_csv } => {
            let model = Model::new(set.resolve()?)?;
            let g = grid.build(&model, 257)?;
            let text = report::build(&model, &g)?;
            print!("{text}");
            let path = out.join("report.txt");
            std::fs::write(&path, &text)?;
            println!("wrote {}", path.display());
            if matrices_csv {
                let path = out.join("report_matrices.csv");
                report::matrices_csv(&model, &path)?;
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
    }
}

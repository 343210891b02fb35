//! Deterministic dataset emission: CSV files with a metadata comment line
//! and 17-significant-digit floats, plus generated gnuplot scripts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Fixed float formatting so identical invocations emit identical bytes.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        // normalize -0
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}

pub struct CsvWriter {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvWriter {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns.len(), "column mismatch");
        self.rows.push(values.iter().map(|&v| fmt_float(v)).collect());
    }

    pub fn row_mixed(&mut self, values: Vec<String>) {
        assert_eq!(values.len(), self.columns.len(), "column mismatch");
        self.rows.push(values);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        let meta_line: Vec<String> = self
            .meta
            .iter()
            .map(|(k, v)| format!("{k}={}", v.replace([' ', ','], "_")))
            .collect();
        writeln!(text, "# {}", meta_line.join(" "))?;
        writeln!(text, "{}", self.columns.join(","))?;
        for row in &self.rows {
            writeln!(text, "{}", row.join(","))?;
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}

/// Resolve the output directory: `--out` flag, then the FANOPAIR_OUT
/// environment variable, then `./out`.
pub fn out_dir(flag: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .clone()
        .or_else(|| std::env::var_os("FANOPAIR_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

/// Minimal gnuplot script plotting the given CSV curves or map.
pub enum PlotKind {
    /// (x column index, y column indices) of a line plot
    Curves { x: usize, ys: Vec<(usize, String)> },
    /// long-format (x, y, value) map
    Map,
}

pub fn write_plot_script(path: &Path, csv_name: &str, title: &str, kind: &PlotKind) -> Result<()> {
    let mut s = String::new();
    writeln!(s, "set datafile separator ','")?;
    writeln!(s, "set datafile commentschars '#'")?;
    writeln!(s, "set title '{title}'")?;
    writeln!(s, "set key outside")?;
    match kind {
        PlotKind::Curves { x, ys } => {
            writeln!(s, "set logscale y")?;
            let parts: Vec<String> = ys
                .iter()
                .map(|(col, label)| {
                    format!("'{csv_name}' skip 2 using {}:{} with lines title '{label}'", x + 1, col + 1)
                })
                .collect();
            writeln!(s, "plot {}", parts.join(", \\\n     "))?;
        }
        PlotKind::Map => {
            writeln!(s, "set view map")?;
            writeln!(s, "set palette rgbformulae 22,13,-31")?;
            writeln!(s, "splot '{csv_name}' skip 2 using 1:2:3 with points pointtype 5 palette notitle")?;
        }
    }
    writeln!(s, "pause -1 'press enter'")?;
    fs::write(path, s).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

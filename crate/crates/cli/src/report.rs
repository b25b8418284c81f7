//! Output persistence. The CSV is the canonical artifact; the JSON carries
//! the same rows plus the fully resolved config and version; the gnuplot
//! script is a convenience that consumes the CSV and is never a data source.

use crate::config::ExperimentConfig;
use crate::experiments::{Outcome, ResultRow};
use anyhow::{bail, Context, Result};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

pub const CSV_HEADER: &str = "N,s,t,eps,norm_data_hs,norm_data_l2,norm_I2_hs,norm_u_hs,norm_residual_hs,ratio_u_over_data,method_discrepancy";

fn fmt(v: f64) -> String {
    // 13 significant digits; round-trips comfortably at the 12-digit contract
    format!("{v:.12e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

pub fn write_csv<W: Write>(w: &mut W, rows: &[ResultRow]) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt(r.n),
            fmt(r.s),
            fmt(r.t),
            fmt(r.eps),
            fmt_opt(r.norm_data_hs),
            fmt_opt(r.norm_data_l2),
            fmt_opt(r.norm_i2_hs),
            fmt_opt(r.norm_u_hs),
            fmt_opt(r.norm_residual_hs),
            fmt_opt(r.ratio_u_over_data),
            fmt_opt(r.method_discrepancy),
        )?;
    }
    Ok(())
}

pub fn parse_csv<R: BufRead>(r: R) -> Result<Vec<ResultRow>> {
    let mut lines = r.lines();
    let header = lines.next().context("empty CSV")??;
    if header.trim() != CSV_HEADER {
        bail!("unexpected CSV header {header:?}");
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 11 {
            bail!("expected 11 columns, got {} in {line:?}", cells.len());
        }
        let req = |i: usize| -> Result<f64> {
            cells[i]
                .parse::<f64>()
                .with_context(|| format!("column {i} in {line:?}"))
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if cells[i].is_empty() {
                Ok(None)
            } else {
                Ok(Some(req(i)?))
            }
        };
        rows.push(ResultRow {
            n: req(0)?,
            s: req(1)?,
            t: req(2)?,
            eps: req(3)?,
            norm_data_hs: opt(4)?,
            norm_data_l2: opt(5)?,
            norm_i2_hs: opt(6)?,
            norm_u_hs: opt(7)?,
            norm_residual_hs: opt(8)?,
            ratio_u_over_data: opt(9)?,
            method_discrepancy: opt(10)?,
        });
    }
    Ok(rows)
}

const PLOT_SCRIPT: &str = r#"# norm-vs-N curves on log axes, reading the canonical results.csv
set datafile separator ","
set logscale xy
set xlabel "N"
set ylabel "norm"
set key outside right
set grid
plot "results.csv" using 1:5 with linespoints title "data H^s", \
     "results.csv" using 1:7 with linespoints title "second iterate H^s", \
     "results.csv" using 1:8 with linespoints title "flow map H^s"
"#;

pub struct EmittedFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
    pub plot: PathBuf,
}

/// Writes `results.csv`, `results.json` (rows + config echo + version) and
/// `plot.gp` into the configured output directory.
pub fn emit_outputs(outcome: &Outcome, cfg: &ExperimentConfig) -> Result<EmittedFiles> {
    std::fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;

    let csv = cfg.output_dir.join("results.csv");
    let mut buf = Vec::new();
    write_csv(&mut buf, &outcome.rows)?;
    std::fs::write(&csv, buf).with_context(|| format!("writing {}", csv.display()))?;

    let json = cfg.output_dir.join("results.json");
    let doc = serde_json::json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "rows": outcome.rows,
        "checks": outcome.checks,
        "all_passed": outcome.all_passed(),
    });
    std::fs::write(&json, serde_json::to_string_pretty(&doc)?)
        .with_context(|| format!("writing {}", json.display()))?;

    let plot = cfg.output_dir.join("plot.gp");
    std::fs::write(&plot, PLOT_SCRIPT).with_context(|| format!("writing {}", plot.display()))?;

    Ok(EmittedFiles { csv, json, plot })
}

pub fn write_theta_csv(path: &Path, rows: &[(f64, f64, f64)]) -> Result<()> {
    let mut buf = String::from("xi,xi1,theta\n");
    for (xi, xi1, theta) in rows {
        buf.push_str(&format!("{},{},{}\n", fmt(*xi), fmt(*xi1), fmt(*theta)));
    }
    std::fs::write(path, buf).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

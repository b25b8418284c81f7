//! The desk-scale sweeps: data-norm decay, second-iterate inflation, series
//! approximation quality, flow-map discontinuity, and solver validation.
//!
//! Each runner returns the raw result rows plus named pass/fail predicates.
//! Thresholds ride on ratios across the `N` sweep, never on absolute
//! constants, because the mechanism under test is scale comparisons: the
//! data norm collapses while the quadratic response does not.

use crate::config::{Experiment, ExperimentConfig, ModeSpec};
use anyhow::{anyhow, bail, Result};
use bbm_core::data::{phi_periodic, phi_sharp};
use bbm_core::picard::{i2_closed_form, i2_duhamel, PicardExpansion};
use bbm_core::solver::{evolve, invariant_h1, invariant_mean, residual_ivp1};
use bbm_core::{FrequencyGrid, SolverConfig, SpectralField};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Truncation order of the Picard expansion used by the series sweeps: the
/// tail beyond it sits at `eps^7 ~ 1e-9` of the leading term at desk
/// amplitudes, far below every tolerance in play.
pub const SERIES_ORDER: usize = 6;

/// Two independent routes to the second iterate must agree to this relative
/// L2 tolerance or the run aborts: a larger gap means an implementation
/// fault, not science.
pub const ORACLE_GATE: f64 = 1e-6;

/// One output record per `(N, s, t, eps)` tuple; columns a given experiment
/// does not produce stay empty.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    #[serde(rename = "N")]
    pub n: f64,
    pub s: f64,
    pub t: f64,
    pub eps: f64,
    pub norm_data_hs: Option<f64>,
    pub norm_data_l2: Option<f64>,
    #[serde(rename = "norm_I2_hs")]
    pub norm_i2_hs: Option<f64>,
    pub norm_u_hs: Option<f64>,
    pub norm_residual_hs: Option<f64>,
    pub ratio_u_over_data: Option<f64>,
    pub method_discrepancy: Option<f64>,
}

impl ResultRow {
    fn new(n: f64, s: f64, t: f64, eps: f64) -> Self {
        Self {
            n,
            s,
            t,
            eps,
            norm_data_hs: None,
            norm_data_l2: None,
            norm_i2_hs: None,
            norm_u_hs: None,
            norm_residual_hs: None,
            ratio_u_over_data: None,
            method_discrepancy: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub rows: Vec<ResultRow>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.passed)
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::DataNorms => run_data_norms(cfg),
        Experiment::I2Inflation => run_i2_inflation(cfg),
        Experiment::SeriesApprox => run_series_approx(cfg),
        Experiment::Discontinuity => run_discontinuity(cfg),
        Experiment::SolverValidate => run_solver_validate(cfg),
    }
}

/// Counterexample datum for the configured mode: sharp indicator boxes on
/// the line, the unit band of half-width 1 on the torus.
pub fn build_data(grid: &FrequencyGrid, mode: ModeSpec, n: f64) -> Result<SpectralField> {
    let field = match mode {
        ModeSpec::LineApprox => phi_sharp(n, grid)?,
        ModeSpec::Periodic => phi_periodic(n as i64, 1, grid)?,
    };
    Ok(field)
}

fn data_l2_reference(mode: ModeSpec) -> f64 {
    match mode {
        ModeSpec::LineApprox => 2.0,
        ModeSpec::Periodic => 6.0f64.sqrt(),
    }
}

/// Upper edge of the near-zero output window where the opposite bands
/// interact. On the line the boxes have half-width 1 and the window
/// `|xi| <= 1/4` is well resolved; on the integer lattice that interval
/// holds only the (annihilated) zero mode, so the window widens to the
/// full quadratic image of the band, `|n| <= 2`.
fn low_window(mode: ModeSpec) -> f64 {
    match mode {
        ModeSpec::LineApprox => 0.25,
        ModeSpec::Periodic => 2.0,
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

fn rel_l2(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    let scale = a.l2_norm().max(b.l2_norm());
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(a.sub(b)?.l2_norm() / scale)
}

fn min_over_max(values: &[f64]) -> f64 {
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0f64, f64::max);
    if hi == 0.0 {
        0.0
    } else {
        lo / hi
    }
}

fn zero_mode_check(name: &str, fields: &[(&str, &SpectralField)]) -> Check {
    let worst = fields
        .iter()
        .map(|(_, f)| f.coeff(0).norm())
        .fold(0.0f64, f64::max);
    Check::new(
        name,
        worst <= 1e-14,
        format!("largest |c(0)| = {worst:.3e} (gate 1e-14)"),
    )
}

pub fn run_data_norms(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.core_grid()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let l2_ref = data_l2_reference(cfg.grid.mode);

    for &s in &cfg.s_list {
        let mut hs_col = Vec::new();
        for &n in &cfg.n_list {
            let data = build_data(&grid, cfg.grid.mode, n)?;
            let hs = data.hs_norm(s);
            let l2 = data.l2_norm();
            hs_col.push(hs);
            let mut row = ResultRow::new(n, s, cfg.t, cfg.eps);
            row.norm_data_hs = Some(hs);
            row.norm_data_l2 = Some(l2);
            rows.push(row);

            let rel = (l2 - l2_ref).abs() / l2_ref;
            checks.push(Check::new(
                format!("l2_constant_s{s}_N{n}"),
                rel <= 0.02,
                format!("l2 = {l2:.6}, reference {l2_ref:.6}, off by {:.2}%", rel * 100.0),
            ));
        }
        let slope = log_slope(&cfg.n_list, &hs_col);
        checks.push(Check::new(
            format!("hs_slope_s{s}"),
            (slope - s).abs() <= 0.05,
            format!("fitted log-log slope {slope:.4} vs s = {s}"),
        ));
    }

    if cfg.grid.mode == ModeSpec::Periodic {
        let data = build_data(&grid, cfg.grid.mode, cfg.n_list[0])?;
        checks.push(zero_mode_check("zero_mode_data", &[("data", &data)]));
    }

    Ok(Outcome { rows, checks })
}

pub fn run_i2_inflation(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.core_grid()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();

    for &s in &cfg.s_list {
        let per_n: Vec<_> = cfg
            .n_list
            .par_iter()
            .map(|&n| -> Result<_> {
                let data = build_data(&grid, cfg.grid.mode, n)?;
                let by_time = i2_duhamel(&data, cfg.t, cfg.quadrature.q)?;
                let closed = i2_closed_form(&data, cfg.t, cfg.quadrature.refine)?;
                let disc = rel_l2(&by_time, &closed)?;
                if disc > ORACLE_GATE {
                    bail!(
                        "row N = {n}, s = {s}: the two second-iterate routes disagree by {disc:.3e} \
                         (gate {ORACLE_GATE:.0e}); this flags an implementation fault"
                    );
                }
                Ok((n, data, by_time, disc))
            })
            .collect();

        let mut i2_col = Vec::new();
        let mut restricted_col = Vec::new();
        let mut data_col = Vec::new();
        let mut zero_worst = 0.0f64;
        for item in per_n {
            let (n, data, i2, disc) = item?;
            let hs_i2 = i2.hs_norm(s);
            let restricted = i2.hs_norm_band(s, 0.0, low_window(cfg.grid.mode));
            let hs_data = data.hs_norm(s);
            zero_worst = zero_worst.max(i2.coeff(0).norm().max(data.coeff(0).norm()));
            i2_col.push(hs_i2);
            restricted_col.push(restricted);
            data_col.push(hs_data);

            let mut row = ResultRow::new(n, s, cfg.t, cfg.eps);
            row.norm_data_hs = Some(hs_data);
            row.norm_data_l2 = Some(data.l2_norm());
            row.norm_i2_hs = Some(hs_i2);
            row.method_discrepancy = Some(disc);
            rows.push(row);
        }

        checks.push(Check::new(
            format!("i2_no_decay_s{s}"),
            min_over_max(&i2_col) >= 0.5,
            format!("min/max = {:.4} over norms {:?}", min_over_max(&i2_col), i2_col),
        ));
        checks.push(Check::new(
            format!("i2_restricted_no_decay_s{s}"),
            min_over_max(&restricted_col) >= 0.5,
            format!(
                "low-frequency window |xi| <= {}: min/max = {:.4} over {:?}",
                low_window(cfg.grid.mode),
                min_over_max(&restricted_col),
                restricted_col
            ),
        ));
        let n_ratio = cfg.n_list.last().unwrap() / cfg.n_list[0];
        let expected_decay = n_ratio.powf(-s);
        let decay = data_col[0] / data_col.last().unwrap();
        checks.push(Check::new(
            format!("data_decay_s{s}"),
            decay >= 0.85 * expected_decay,
            format!("data norm shrank {decay:.3}x (theory {expected_decay:.3}x)"),
        ));
        if cfg.grid.mode == ModeSpec::Periodic {
            checks.push(Check::new(
                format!("zero_mode_s{s}"),
                zero_worst <= 1e-14,
                format!("largest |c(0)| across data and iterates = {zero_worst:.3e}"),
            ));
        }
    }

    Ok(Outcome { rows, checks })
}

pub fn run_series_approx(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.core_grid()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();

    for &s in &cfg.s_list {
        for &n in &cfg.n_list {
            let data = build_data(&grid, cfg.grid.mode, n)?;
            let expansion = PicardExpansion::compute(&data, cfg.t, SERIES_ORDER, cfg.quadrature.q)?;
            let i2_norm = expansion
                .term(2)
                .scale(Complex64::new(2.0, 0.0))
                .hs_norm(s);

            let eps_pair = [cfg.eps, 0.5 * cfg.eps];
            let per_eps: Vec<_> = eps_pair
                .par_iter()
                .map(|&e| -> Result<_> {
                    let u = if e == 0.0 {
                        SpectralField::zero(grid)
                    } else {
                        let solver = SolverConfig::for_interval(cfg.solver.dt, cfg.t)?;
                        evolve(&data.scale(Complex64::new(e, 0.0)), &solver)?
                            .final_field()
                            .clone()
                    };
                    let truncated = expansion.series_sum_to(e, 2);
                    let residual = u.sub(&truncated)?.hs_norm(s);
                    let series_gap = rel_l2(&u, &expansion.series_sum(e))?;
                    Ok((e, u.hs_norm(s), residual, series_gap))
                })
                .collect();

            let mut residuals = Vec::new();
            for item in per_eps {
                let (e, norm_u, residual, series_gap) = item?;
                residuals.push(residual);
                let mut row = ResultRow::new(n, s, cfg.t, e);
                row.norm_data_hs = Some(data.hs_norm(s));
                row.norm_data_l2 = Some(data.l2_norm());
                row.norm_i2_hs = Some(i2_norm);
                row.norm_u_hs = Some(norm_u);
                row.norm_residual_hs = Some(residual);
                row.method_discrepancy = Some(series_gap);
                rows.push(row);

                checks.push(Check::new(
                    format!("series_solver_agree_s{s}_N{n}_eps{e}"),
                    series_gap <= 1e-5,
                    format!("relative L2 gap solver vs series = {series_gap:.3e}"),
                ));
            }

            if cfg.eps == 0.0 {
                checks.push(Check::new(
                    format!("residual_zero_at_zero_eps_s{s}_N{n}"),
                    residuals.iter().all(|r| *r == 0.0),
                    format!("residuals {residuals:?}"),
                ));
            } else {
                let ratio = residuals[0] / residuals[1];
                checks.push(Check::new(
                    format!("residual_cubic_in_eps_s{s}_N{n}"),
                    (7.0..=9.0).contains(&ratio),
                    format!(
                        "residual({}) / residual({}) = {ratio:.3}, cubic scaling predicts 8",
                        eps_pair[0], eps_pair[1]
                    ),
                ));
                checks.push(Check::new(
                    format!("i2_dominates_residual_s{s}_N{n}"),
                    residuals[0] < 0.1 * cfg.eps * cfg.eps * i2_norm,
                    format!(
                        "residual {:.3e} vs 0.1 eps^2 |i2| = {:.3e}",
                        residuals[0],
                        0.1 * cfg.eps * cfg.eps * i2_norm
                    ),
                ));
            }
        }
    }

    Ok(Outcome { rows, checks })
}

pub fn run_discontinuity(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.core_grid()?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();

    for &s in &cfg.s_list {
        let per_n: Vec<_> = cfg
            .n_list
            .par_iter()
            .map(|&n| -> Result<_> {
                let data = build_data(&grid, cfg.grid.mode, n)?;
                let hs_data = data.hs_norm(s);
                let l2_data = data.l2_norm();
                let mut variants = Vec::new();
                for e in [cfg.eps, 0.5 * cfg.eps] {
                    let solver = SolverConfig::for_interval(cfg.solver.dt, cfg.t)?;
                    let u = evolve(&data.scale(Complex64::new(e, 0.0)), &solver)?
                        .final_field()
                        .clone();
                    let norm_u = u.hs_norm(s);
                    variants.push((e, norm_u, u.coeff(0).norm()));
                }
                Ok((n, hs_data, l2_data, variants))
            })
            .collect();

        let mut norm_u_col = Vec::new();
        let mut ratio_col = Vec::new();
        let mut data_scaled_col = Vec::new();
        let mut eps_scaling_at_max_n = 0.0;
        let mut zero_worst = 0.0f64;
        for item in per_n {
            let (n, hs_data, l2_data, variants) = item?;
            let primary = variants[0].1;
            let halved = variants[1].1;
            norm_u_col.push(primary);
            ratio_col.push(primary / (variants[0].0 * hs_data));
            data_scaled_col.push(variants[0].0 * hs_data);
            if (n - cfg.n_list.last().unwrap()).abs() < 1e-9 {
                eps_scaling_at_max_n = primary / halved;
            }
            for (e, norm_u, zero) in variants {
                zero_worst = zero_worst.max(zero);
                let mut row = ResultRow::new(n, s, cfg.t, e);
                row.norm_data_hs = Some(hs_data);
                row.norm_data_l2 = Some(l2_data);
                row.norm_u_hs = Some(norm_u);
                row.ratio_u_over_data = Some(norm_u / (e * hs_data));
                rows.push(row);
            }
        }

        checks.push(Check::new(
            format!("u_norm_no_decay_s{s}"),
            min_over_max(&norm_u_col) >= 0.5,
            format!(
                "flow-map norms min/max = {:.4} over {norm_u_col:?}",
                min_over_max(&norm_u_col)
            ),
        ));
        let growth = ratio_col.last().unwrap() / ratio_col[0];
        checks.push(Check::new(
            format!("ratio_growth_s{s}"),
            growth >= 4.0,
            format!("|u|/|data| grew {growth:.2}x across the N sweep ({ratio_col:?})"),
        ));
        checks.push(Check::new(
            format!("ratio_monotone_s{s}"),
            ratio_col.windows(2).all(|w| w[1] >= w[0]),
            format!("ratios along N: {ratio_col:?}"),
        ));
        checks.push(Check::new(
            format!("eps_quadratic_scaling_s{s}"),
            (3.5..=4.5).contains(&eps_scaling_at_max_n),
            format!(
                "halving eps at N = {} scaled the norm by {eps_scaling_at_max_n:.3} (expect ~4)",
                cfg.n_list.last().unwrap()
            ),
        ));
        checks.push(Check::new(
            format!("data_norm_vanishes_s{s}"),
            data_scaled_col.windows(2).all(|w| w[1] < w[0]),
            format!("eps * |data|_Hs along N: {data_scaled_col:?}"),
        ));
        if cfg.grid.mode == ModeSpec::Periodic {
            checks.push(Check::new(
                format!("zero_mode_s{s}"),
                zero_worst <= 1e-14,
                format!("largest |c(0)| across evolved states = {zero_worst:.3e}"),
            ));
        }
    }

    Ok(Outcome { rows, checks })
}

/// Bundled solver diagnostics on a smooth reference datum (its own small
/// grid; the sweep grid is irrelevant here).
pub fn run_solver_validate(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = FrequencyGrid::line(128, 0.125)?;
    let gaussian = |amp: f64| {
        SpectralField::from_symbol(grid, |xi| Complex64::new(amp * (-xi * xi).exp(), 0.0))
    };
    let mut checks = Vec::new();

    // self-convergence order of the time stepper
    let u0 = gaussian(0.8)?;
    let final_at = |dt: f64| -> Result<SpectralField> {
        let solver = SolverConfig::for_interval(dt, 2.0)?;
        Ok(evolve(&u0, &solver)?.final_field().clone())
    };
    let (a, b, c) = (final_at(0.1)?, final_at(0.05)?, final_at(0.025)?);
    let order = (a.sub(&b)?.l2_norm() / b.sub(&c)?.l2_norm()).log2();
    checks.push(Check::new(
        "rk4_order",
        order >= 3.8,
        format!("observed self-convergence order {order:.2}"),
    ));

    // conservation and residual on one well-resolved run
    let smooth = gaussian(0.7)?;
    let solver = SolverConfig::for_interval(cfg.solver.dt, 1.0)?;
    let traj = evolve(&smooth, &solver)?;
    let m0 = invariant_mean(traj.field(0));
    let mean_drift = traj
        .fields()
        .iter()
        .map(|f| (invariant_mean(f) - m0).abs())
        .fold(0.0f64, f64::max)
        / m0.abs().max(1.0);
    checks.push(Check::new(
        "mean_drift",
        mean_drift <= 1e-14,
        format!("relative mean drift {mean_drift:.3e}"),
    ));
    let h0 = invariant_h1(traj.field(0));
    let h1_drift = traj
        .fields()
        .iter()
        .map(|f| (invariant_h1(f) - h0).abs() / h0)
        .fold(0.0f64, f64::max);
    checks.push(Check::new(
        "h1_drift",
        h1_drift <= 1e-8,
        format!("relative H1 functional drift {h1_drift:.3e} at dt = {}", solver.dt),
    ));
    let residual = residual_ivp1(&traj)?;
    checks.push(Check::new(
        "residual_ivp1",
        residual <= 1e-8,
        format!("max interior residual {residual:.3e}"),
    ));

    // reversibility: flip x, integrate forward, flip back
    let fwd = {
        let solver = SolverConfig::for_interval(cfg.solver.dt, 0.5)?;
        evolve(&smooth, &solver)?.final_field().clone()
    };
    let flip = |f: &SpectralField| -> Result<SpectralField> {
        SpectralField::from_coeffs(*f.grid(), f.coeffs().iter().rev().cloned().collect())
            .map_err(Into::into)
    };
    let back = {
        let solver = SolverConfig::for_interval(cfg.solver.dt, 0.5)?;
        evolve(&flip(&fwd)?, &solver)?.final_field().clone()
    };
    let return_err = flip(&back)?.sub(&smooth)?.l2_norm();
    checks.push(Check::new(
        "forward_backward",
        return_err <= 1e-8,
        format!("return trip error {return_err:.3e}"),
    ));

    // the origin is a fixed point, exactly
    let zero_run = evolve(&SpectralField::zero(grid), &SolverConfig::new(0.01, 50)?)?;
    let zero_peak = zero_run
        .fields()
        .iter()
        .map(|f| f.max_abs())
        .fold(0.0f64, f64::max);
    checks.push(Check::new(
        "zero_fixed_point",
        zero_peak == 0.0,
        format!("peak coefficient along the zero trajectory {zero_peak:.3e}"),
    ));

    Ok(Outcome {
        rows: Vec::new(),
        checks,
    })
}

/// Resonance-surface scan, `xi,xi1,theta` CSV rows over a rectangular
/// lattice.
pub fn theta_scan(
    xi_range: (f64, f64, usize),
    xi1_range: (f64, f64, usize),
) -> Result<Vec<(f64, f64, f64)>> {
    let (x0, x1, nx) = xi_range;
    let (y0, y1, ny) = xi1_range;
    if nx < 2 || ny < 2 || x1 <= x0 || y1 <= y0 {
        return Err(anyhow!("need at least a 2x2 lattice with increasing bounds"));
    }
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let xi = x0 + (x1 - x0) * i as f64 / (nx - 1) as f64;
        for j in 0..ny {
            let xi1 = y0 + (y1 - y0) * j as f64 / (ny - 1) as f64;
            out.push((xi, xi1, bbm_core::symbols::theta_direct(xi, xi1)));
        }
    }
    Ok(out)
}

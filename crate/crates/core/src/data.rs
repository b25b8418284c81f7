//! Counterexample data families: indicator spectra concentrated on the bands
//! `|xi| in [N-1, N+1]` (and variants), whose L2 size stays fixed while every
//! negative-index Sobolev norm decays as `N` grows.

use crate::error::{Result, SpectralError};
use crate::field::SpectralField;
use crate::grid::{FrequencyGrid, GridMode};
use crate::FOURIER_NORM;
use num_complex::Complex64;

/// Smallest admissible band center; the families are built for `N >> 1`.
pub const MIN_CENTER: f64 = 8.0;

fn check_center(n: f64) -> Result<()> {
    if !n.is_finite() || n < MIN_CENTER {
        return Err(SpectralError::DataLayout(format!(
            "band center N = {n} below the minimum {MIN_CENTER}"
        )));
    }
    Ok(())
}

fn check_extent(grid: &FrequencyGrid, n: f64) -> Result<()> {
    if grid.xi_max() < 2.0 * n + 4.0 {
        return Err(SpectralError::DataLayout(format!(
            "xi_max = {} but quadratic products of data at N = {n} need xi_max >= {}",
            grid.xi_max(),
            2.0 * n + 4.0
        )));
    }
    Ok(())
}

fn on_lattice(x: f64, delta_xi: f64) -> bool {
    let q = x / delta_xi;
    (q - q.round()).abs() <= 1e-9 * q.abs().max(1.0)
}

/// Sharp family: `coeff(xi) = 1` on `|xi| in [N-1, N+1]`, 0 elsewhere
/// (closed intervals, boundary nodes at full weight). Real, even, hermitian.
///
/// `N` and `N +- 1` must land on lattice nodes so the discrete L2 mass is
/// exactly grid-independent, and the grid must reach `xi_max >= 2N + 4` so
/// downstream quadratic products stay on-grid.
pub fn phi_sharp(n: f64, grid: &FrequencyGrid) -> Result<SpectralField> {
    check_center(n)?;
    check_extent(grid, n)?;
    if grid.mode() != GridMode::LineApprox {
        return Err(SpectralError::DataLayout(
            "sharp family lives on the line lattice; use phi_periodic on the torus".into(),
        ));
    }
    let dxi = grid.delta_xi();
    if !on_lattice(n, dxi) || !on_lattice(n - 1.0, dxi) || !on_lattice(n + 1.0, dxi) {
        return Err(SpectralError::DataLayout(format!(
            "N = {n}: band edges N - 1, N + 1 must fall on lattice nodes (delta_xi = {dxi})"
        )));
    }
    let slack = 1e-9 * dxi;
    SpectralField::from_symbol(*grid, |xi| {
        let a = xi.abs();
        if a >= n - 1.0 - slack && a <= n + 1.0 + slack {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Closed-form physical-space evaluation of the sharp family:
/// `(4/sqrt(2*pi)) cos(N x) sin(x)/x`, the exact inverse transform of the
/// two unit boxes under the unitary convention.
pub fn phi_sharp_physical(n: f64, x: f64) -> f64 {
    let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
    4.0 * FOURIER_NORM * (n * x).cos() * sinc
}

/// Scaled family: boxes of half-width `gamma = N^{-sigma}` at `+-N` with
/// amplitude `gamma^{-1/2} N^{-s}`, sized so its `H^s` norm is O(1).
///
/// Needs `delta_xi <= gamma/8` so each box is resolved by at least 8 nodes.
pub fn phi_bt(n: f64, s: f64, sigma: f64, grid: &FrequencyGrid) -> Result<SpectralField> {
    check_center(n)?;
    check_extent(grid, n)?;
    if grid.mode() != GridMode::LineApprox {
        return Err(SpectralError::DataLayout(
            "scaled family lives on the line lattice".into(),
        ));
    }
    if !(0.0 < sigma && sigma < 1.0) {
        return Err(SpectralError::DataLayout(format!(
            "sigma = {sigma} outside (0, 1)"
        )));
    }
    let gamma = n.powf(-sigma);
    if grid.delta_xi() > gamma / 8.0 {
        return Err(SpectralError::DataLayout(format!(
            "gamma = {gamma:.6} under-resolved: need delta_xi <= {:.6}, got {}",
            gamma / 8.0,
            grid.delta_xi()
        )));
    }
    let amp = gamma.powf(-0.5) * n.powf(-s);
    let slack = 1e-9 * grid.delta_xi();
    SpectralField::from_symbol(*grid, |xi| {
        let a = xi.abs();
        if a >= n - gamma - slack && a <= n + gamma + slack {
            Complex64::new(amp, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Half-width of the scaled family's boxes, `N^{-sigma}`.
pub fn bt_gamma(n: f64, sigma: f64) -> f64 {
    n.powf(-sigma)
}

/// Torus family: unit coefficients on the integer bands
/// `N - width <= |n| <= N + width`, zero elsewhere. The zero mode is
/// excluded by construction (mean-free data), so the band must not touch 0.
pub fn phi_periodic(n: i64, width: i64, grid: &FrequencyGrid) -> Result<SpectralField> {
    if grid.mode() != GridMode::Periodic {
        return Err(SpectralError::DataLayout(
            "periodic family needs a periodic grid".into(),
        ));
    }
    check_center(n as f64)?;
    if width < 0 {
        return Err(SpectralError::DataLayout(format!("negative width {width}")));
    }
    if n - width <= 0 {
        return Err(SpectralError::DataLayout(format!(
            "band [{}, {}] touches the zero mode, which mean-free torus data must exclude",
            n - width,
            n + width
        )));
    }
    if (n + width) as usize > grid.half_modes() {
        return Err(SpectralError::DataLayout(format!(
            "band reaches |n| = {} beyond the grid's {}",
            n + width,
            grid.half_modes()
        )));
    }
    let m = grid.half_modes() as i64;
    let coeffs = (-m..=m)
        .map(|j| {
            let a = j.abs();
            if a >= n - width && a <= n + width {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    SpectralField::from_coeffs(*grid, coeffs)
}

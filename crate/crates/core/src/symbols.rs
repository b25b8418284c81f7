//! Closed-form scalar symbols: the BBM dispersion multiplier `phi`, the
//! quadratic resonance function `theta` in defining and rational form, and
//! the stabilized kernel `(e^z - 1)/z` that carries the time integral of an
//! oscillating exponential.

use num_complex::Complex64;

/// Switch radius between the series and the direct evaluation of
/// [`psi_kernel`]. Both branches are accurate to better than 1e-12 here.
pub const PSI_SERIES_RADIUS: f64 = 1e-4;

/// Dispersion symbol `phi(xi) = xi / (1 + xi^2)`.
///
/// Odd, bounded by 1/2 with the extremum at `|xi| = 1`, decays like `1/xi`.
#[inline]
pub fn phi(xi: f64) -> f64 {
    xi / (1.0 + xi * xi)
}

/// Resonance function `theta(xi, xi1) = phi(xi1) + phi(xi - xi1) - phi(xi)`,
/// the phase mismatch of the quadratic interaction producing output
/// frequency `xi` from the pair `(xi1, xi - xi1)`.
#[inline]
pub fn theta_direct(xi: f64, xi1: f64) -> f64 {
    phi(xi1) + phi(xi - xi1) - phi(xi)
}

/// Rational form of the resonance function,
/// `xi*xi1*(xi-xi1)*(xi^2 - xi*xi1 + xi1^2 + 3) / [(1+xi1^2)(1+(xi-xi1)^2)(1+xi^2)]`.
///
/// Algebraically identical to [`theta_direct`], kept as a cross-check; the
/// denominator is at least 1, so the expression is always finite.
#[inline]
pub fn theta_rational(xi: f64, xi1: f64) -> f64 {
    let d = xi - xi1;
    let num = xi * xi1 * d * (xi * xi - xi * xi1 + xi1 * xi1 + 3.0);
    let den = (1.0 + xi1 * xi1) * (1.0 + d * d) * (1.0 + xi * xi);
    num / den
}

/// A quadratic interaction point: output frequency `xi`, internal
/// frequency `xi1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonancePoint {
    pub xi: f64,
    pub xi1: f64,
}

impl ResonancePoint {
    pub fn new(xi: f64, xi1: f64) -> Self {
        Self { xi, xi1 }
    }

    pub fn theta_direct(&self) -> f64 {
        theta_direct(self.xi, self.xi1)
    }

    pub fn theta_rational(&self) -> f64 {
        theta_rational(self.xi, self.xi1)
    }
}

/// `psi(z) = (e^z - 1) / z` with the removable singularity filled in,
/// `psi(0) = 1`.
///
/// The time integral of an oscillation factors through it:
/// `int_0^t e^{-i t' theta} dt' = t * psi(-i t theta)`.
/// For `|z| < 1e-4` the cubic Taylor truncation is used; above that an
/// expm1-style split keeps every term fully accurate, so the two branches
/// agree to ~1e-15 across the switch.
pub fn psi_kernel(z: Complex64) -> Complex64 {
    if z.norm_sqr() < PSI_SERIES_RADIUS * PSI_SERIES_RADIUS {
        psi_series(z)
    } else {
        psi_direct(z)
    }
}

#[inline]
fn psi_series(z: Complex64) -> Complex64 {
    1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0)))
}

#[inline]
fn psi_direct(z: Complex64) -> Complex64 {
    // e^z - 1 = expm1(x) cos y - 2 sin^2(y/2) + i e^x sin y, every summand
    // O(|z|) accurate, no cancellation blowup near the origin.
    let (x, y) = (z.re, z.im);
    let re = x.exp_m1() * y.cos() - 2.0 * (0.5 * y).sin().powi(2);
    let im = x.exp() * y.sin();
    Complex64::new(re, im) / z
}

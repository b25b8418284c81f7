//! Complex coefficients on a frequency grid, with Sobolev norms, multiplier
//! action, the free evolution group and exact quadratic products.

use crate::conv::Convolver;
use crate::error::{Result, SpectralError};
use crate::grid::FrequencyGrid;
use crate::symbols::phi;
use crate::{FOURIER_NORM, HERMITIAN_REL_TOL, SUPPORT_REL_TOL};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::io::{BufRead, Write};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A function represented by its Fourier coefficients on a [`FrequencyGrid`].
///
/// The `hermitian` flag records whether `c(-j) = conj(c(j))` holds to
/// [`HERMITIAN_REL_TOL`], i.e. whether the field is the spectrum of a real
/// function. It is re-detected, never silently repaired, after every
/// operation.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: FrequencyGrid,
    coeffs: Vec<Complex64>,
    hermitian: bool,
}

impl SpectralField {
    pub fn zero(grid: FrequencyGrid) -> Self {
        Self {
            coeffs: vec![ZERO; grid.len()],
            grid,
            hermitian: true,
        }
    }

    /// Samples a symbol on the grid nodes. Rejects non-finite values.
    pub fn from_symbol<F>(grid: FrequencyGrid, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Complex64,
    {
        let coeffs: Vec<Complex64> = grid.nodes().map(f).collect();
        Self::from_coeffs(grid, coeffs)
    }

    /// Wraps an explicit coefficient vector (one value per node, ascending
    /// `xi`). Rejects length mismatch and non-finite entries.
    pub fn from_coeffs(grid: FrequencyGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(SpectralError::InvalidConfig(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        for (a, c) in coeffs.iter().enumerate() {
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(SpectralError::NonFinite { xi: grid.xi_at(a) });
            }
        }
        Ok(Self::from_parts(grid, coeffs))
    }

    /// Internal constructor: trusts finiteness, detects symmetry.
    pub(crate) fn from_parts(grid: FrequencyGrid, coeffs: Vec<Complex64>) -> Self {
        let hermitian = detect_hermitian(&coeffs);
        Self {
            grid,
            coeffs,
            hermitian,
        }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at signed node index `j in [-M, M]`.
    pub fn coeff(&self, j: i64) -> Complex64 {
        let m = self.grid.half_modes() as i64;
        assert!(j.abs() <= m, "node index {j} outside [-{m}, {m}]");
        self.coeffs[(j + m) as usize]
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|xi|` carrying a coefficient above `SUPPORT_REL_TOL` times
    /// the peak magnitude; 0 for the zero field.
    pub fn support_radius(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let thresh = SUPPORT_REL_TOL * peak;
        let m = self.grid.half_modes() as i64;
        let mut r = 0.0f64;
        for (a, c) in self.coeffs.iter().enumerate() {
            if c.norm() > thresh {
                r = r.max((a as i64 - m).unsigned_abs() as f64 * self.grid.delta_xi());
            }
        }
        r
    }

    /// Sobolev norm `( sum_j (1 + xi_j^2)^s |c_j|^2 w )^(1/2)` with the node
    /// weight `w = delta_xi` (unit weight on the torus). Fixed left-to-right
    /// summation order.
    pub fn hs_norm(&self, s: f64) -> f64 {
        let w = self.grid.node_weight();
        let mut acc = 0.0;
        for (a, c) in self.coeffs.iter().enumerate() {
            let xi = self.grid.xi_at(a);
            acc += (1.0 + xi * xi).powf(s) * c.norm_sqr();
        }
        (acc * w).sqrt()
    }

    pub fn l2_norm(&self) -> f64 {
        self.hs_norm(0.0)
    }

    /// Sobolev mass restricted to the band `lo <= |xi| <= hi`.
    pub fn hs_norm_band(&self, s: f64, lo: f64, hi: f64) -> f64 {
        let w = self.grid.node_weight();
        let mut acc = 0.0;
        for (a, c) in self.coeffs.iter().enumerate() {
            let xi = self.grid.xi_at(a);
            if xi.abs() >= lo && xi.abs() <= hi {
                acc += (1.0 + xi * xi).powf(s) * c.norm_sqr();
            }
        }
        (acc * w).sqrt()
    }

    /// Pointwise multiplication of the spectrum by a symbol `m(xi)`.
    /// Hermitian symmetry survives iff `m(-xi) = conj(m(xi))` on the grid,
    /// which the re-detection picks up on the result.
    pub fn apply_multiplier<F>(&self, m: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(a, c)| m(self.grid.xi_at(a)) * c)
            .collect();
        Self::from_parts(self.grid, coeffs)
    }

    /// Free evolution `e^{-i t phi(D)}`: multiplies node `j` by
    /// `e^{-i t phi(xi_j)}`. Unitary, so every `hs_norm` is preserved.
    pub fn semigroup(&self, t: f64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(a, c)| Complex64::from_polar(1.0, -t * phi(self.grid.xi_at(a))) * c)
            .collect();
        Self::from_parts(self.grid, coeffs)
    }

    /// Spectrum of the pointwise product `u * v`: the exact lattice
    /// convolution scaled by `delta_xi / sqrt(2*pi)`, zero padding making the
    /// discrete convolution exact before truncation back to the grid.
    ///
    /// Guarded: both inputs must have spectral support within half the grid
    /// radius, so the truncation drops nothing.
    pub fn quadratic_product(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        let limit = 0.5 * self.grid.xi_max() + 1e-9 * self.grid.delta_xi();
        for f in [self, other] {
            let support = f.support_radius();
            if support > limit {
                return Err(SpectralError::SupportOverflow { support, limit });
            }
        }
        Ok(self.product_truncating(other))
    }

    /// Same exact convolution without the support guard; output support
    /// beyond the grid is projected away (the Galerkin truncation used
    /// inside time steppers, where the spectrum legitimately fills the grid
    /// at high order in the data amplitude).
    pub(crate) fn product_truncating(&self, other: &Self) -> Self {
        let conv = Convolver::new(self.grid.len());
        self.product_with(other, &conv)
    }

    /// Product using a caller-held [`Convolver`] (plan reuse inside loops).
    pub(crate) fn product_with(&self, other: &Self, conv: &Convolver) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let scale = self.grid.node_weight() * FOURIER_NORM;
        let coeffs = conv.convolve(&self.coeffs, &other.coeffs, scale);
        Self::from_parts(self.grid, coeffs)
    }

    /// Linear combination `self + factor * other`.
    pub fn add_scaled(&self, factor: Complex64, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(SpectralError::GridMismatch);
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(Self::from_parts(self.grid, coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| factor * c).collect();
        Self::from_parts(self.grid, coeffs)
    }

    /// Physical-space samples at the `2M+1` collocation points
    /// `x_m = m * period / (2M+1)`, `m in [-M, M]`: the Riemann sum of the
    /// inverse transform, `f(x) = w/sqrt(2*pi) * sum_j c_j e^{i xi_j x}`.
    ///
    /// Discrete Parseval is exact for this pairing, so the physical rms
    /// quadrature reproduces `l2_norm` to rounding.
    pub fn physical_samples(&self) -> Vec<(f64, Complex64)> {
        let n = self.grid.len();
        let m = self.grid.half_modes();
        let dx = self.grid.period() / n as f64;
        let amp = self.grid.node_weight() * FOURIER_NORM;

        // unshift: slot j mod n, then one inverse DFT
        let mut buf = vec![ZERO; n];
        for (a, c) in self.coeffs.iter().enumerate() {
            let j = a as i64 - m as i64;
            buf[j.rem_euclid(n as i64) as usize] = *c;
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);

        (0..n)
            .map(|i| {
                let mm = i as i64 - m as i64; // sample index in [-M, M]
                let x = mm as f64 * dx;
                (x, buf[mm.rem_euclid(n as i64) as usize] * amp)
            })
            .collect()
    }

    /// Columnar text dump, `# xi re im` then one row per node.
    pub fn write_columnar<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "# xi re im")?;
        for (a, c) in self.coeffs.iter().enumerate() {
            writeln!(w, "{:.16e} {:.16e} {:.16e}", self.grid.xi_at(a), c.re, c.im)?;
        }
        Ok(())
    }

    /// Reads a columnar dump back onto `grid`, checking node frequencies.
    pub fn read_columnar<R: BufRead>(grid: FrequencyGrid, r: R) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(grid.len());
        let mut node = 0usize;
        for line in r.lines() {
            let line = line.map_err(|e| SpectralError::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| SpectralError::Parse(format!("short row: {line}")))?
                    .parse()
                    .map_err(|e| SpectralError::Parse(format!("{e}: {line}")))
            };
            let xi = next()?;
            let re = next()?;
            let im = next()?;
            if node >= grid.len() {
                return Err(SpectralError::Parse("too many rows".into()));
            }
            let expect = grid.xi_at(node);
            if (xi - expect).abs() > 1e-9 * (1.0 + expect.abs()) {
                return Err(SpectralError::Parse(format!(
                    "node {node}: xi = {xi}, grid has {expect}"
                )));
            }
            coeffs.push(Complex64::new(re, im));
            node += 1;
        }
        if node != grid.len() {
            return Err(SpectralError::Parse(format!(
                "expected {} rows, got {node}",
                grid.len()
            )));
        }
        Self::from_coeffs(grid, coeffs)
    }
}

/// `c(-j) = conj(c(j))` and `Im c(0) = 0`, to `HERMITIAN_REL_TOL` relative
/// to the peak magnitude (fields at or below unit scale use an absolute
/// floor of the same size).
pub(crate) fn detect_hermitian(coeffs: &[Complex64]) -> bool {
    hermitian_deviation(coeffs) <= hermitian_threshold(coeffs)
}

pub(crate) fn hermitian_threshold(coeffs: &[Complex64]) -> f64 {
    let peak = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    HERMITIAN_REL_TOL * peak.max(1.0)
}

pub(crate) fn hermitian_deviation(coeffs: &[Complex64]) -> f64 {
    let n = coeffs.len();
    let mut dev = coeffs[n / 2].im.abs();
    for a in 0..n / 2 {
        dev = dev.max((coeffs[a] - coeffs[n - 1 - a].conj()).norm());
    }
    dev
}

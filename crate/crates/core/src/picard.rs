//! Duhamel integral operator and the Picard expansion of the flow in the
//! data amplitude.
//!
//! Two independent routes compute the second iterate: [`i2_duhamel`] runs
//! composite Simpson quadrature in time over exact lattice convolutions,
//! while [`i2_closed_form`] evaluates the frequency-side formula in which
//! the time integral is done analytically through the oscillatory kernel
//! `t * psi(-i t theta)`. With `refine = 1` both use the same frequency
//! lattice and weights, so any disagreement beyond the time-quadrature error
//! indicates a normalization or sign bug, not discretization.
//!
//! Normalization: the Duhamel operator carries the integral-equation
//! constant, `duhamel(v, w) = -(i/2) int_0^t S(t-t') phi(D)[v w] dt'`, and
//! the expansion terms are the plain power-series coefficients of the flow
//! `u(eps h, t) = sum_k eps^k I_k`, so [`PicardExpansion::series_sum`]
//! reproduces the nonlinear evolution directly. The standalone second
//! iterate keeps the second-derivative normalization
//! `i2 = -i int_0^t S(t-t') phi(D)[S(t') h]^2 dt' = 2 * I_2`, which is the
//! object whose negative-index Sobolev norm stays bounded below while the
//! data norm vanishes.

use crate::conv::Convolver;
use crate::error::{Result, SpectralError};
use crate::field::SpectralField;
use crate::grid::FrequencyGrid;
use crate::symbols::{phi, psi_kernel, theta_direct};
use crate::FOURIER_NORM;
use num_complex::Complex64;
use rayon::prelude::*;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Memory guard for [`PicardExpansion::compute`]: `(2M+1) * (Q+1) * K` may
/// not exceed this many complex values across the stored trajectories.
pub const PICARD_BUDGET: usize = 1 << 27;

/// A field sampled on the uniform time lattice `t_q = q * dt`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dt: f64,
    fields: Vec<SpectralField>,
}

impl Trajectory {
    /// Wraps explicit samples with spacing `dt` (first sample at t = 0).
    pub fn from_fields(dt: f64, fields: Vec<SpectralField>) -> Result<Self> {
        if fields.is_empty() {
            return Err(SpectralError::LatticeMismatch("empty trajectory".into()));
        }
        if !dt.is_finite() || dt < 0.0 || (dt == 0.0 && fields.len() > 1) {
            return Err(SpectralError::LatticeMismatch(format!(
                "bad time spacing dt = {dt}"
            )));
        }
        let grid = *fields[0].grid();
        if fields.iter().any(|f| *f.grid() != grid) {
            return Err(SpectralError::GridMismatch);
        }
        Ok(Self { dt, fields })
    }

    /// Free evolution `t_q -> S(t_q) h` on `steps + 1` nodes up to `t_final`.
    pub fn free(h: &SpectralField, t_final: f64, steps: usize) -> Self {
        let dt = if steps == 0 { 0.0 } else { t_final / steps as f64 };
        let fields = (0..=steps).map(|q| h.semigroup(q as f64 * dt)).collect();
        Self { dt, fields }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        self.fields[0].grid()
    }

    /// Number of steps `Q` (nodes minus one).
    pub fn steps(&self) -> usize {
        self.fields.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.steps() as f64
    }

    pub fn field(&self, q: usize) -> &SpectralField {
        &self.fields[q]
    }

    pub fn final_field(&self) -> &SpectralField {
        self.fields.last().unwrap()
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.fields.len()).map(move |q| q as f64 * self.dt)
    }
}

fn check_lattice_pair(v: &Trajectory, w: &Trajectory) -> Result<()> {
    if v.grid() != w.grid() {
        return Err(SpectralError::GridMismatch);
    }
    if v.steps() != w.steps() || (v.dt - w.dt).abs() > 1e-12 * v.dt.abs().max(1.0) {
        return Err(SpectralError::LatticeMismatch(format!(
            "trajectories disagree: {} steps of {} vs {} steps of {}",
            v.steps(),
            v.dt,
            w.steps(),
            w.dt
        )));
    }
    Ok(())
}

fn check_even_steps(steps: usize) -> Result<()> {
    if steps < 8 || !steps.is_multiple_of(2) {
        return Err(SpectralError::LatticeMismatch(format!(
            "composite Simpson needs an even step count >= 8, got {steps}"
        )));
    }
    Ok(())
}

fn check_support_guard(h: &SpectralField) -> Result<()> {
    let limit = 0.5 * h.grid().xi_max() + 1e-9 * h.grid().delta_xi();
    let support = h.support_radius();
    if support > limit {
        return Err(SpectralError::SupportOverflow { support, limit });
    }
    Ok(())
}

/// Bilinear Duhamel integral
/// `-(i/2) int_0^T S(T-t') phi(D)[v(t') w(t')] dt'`,
/// composite Simpson over the trajectories' common time lattice.
pub fn duhamel(v: &Trajectory, w: &Trajectory) -> Result<SpectralField> {
    check_lattice_pair(v, w)?;
    let grid = *v.grid();
    if v.t_final() == 0.0 {
        return Ok(SpectralField::zero(grid));
    }
    let steps = v.steps();
    check_even_steps(steps)?;

    let conv = Convolver::new(grid.len());
    let scale = grid.node_weight() * FOURIER_NORM;
    let products: Vec<Vec<Complex64>> = (0..=steps)
        .into_par_iter()
        .map(|q| conv.convolve(v.field(q).coeffs(), w.field(q).coeffs(), scale))
        .collect();

    let phis: Vec<f64> = grid.nodes().map(phi).collect();
    let dt = v.dt();
    let mut acc = vec![ZERO; grid.len()];
    for (q, p) in products.iter().enumerate() {
        let wq = simpson_weight(q, steps) * dt;
        let tq = q as f64 * dt;
        for (a, val) in p.iter().enumerate() {
            acc[a] += wq * Complex64::from_polar(1.0, tq * phis[a]) * val;
        }
    }

    let t = v.t_final();
    let coeffs = acc
        .iter()
        .enumerate()
        .map(|(a, c)| 0.5 * MINUS_I * phis[a] * Complex64::from_polar(1.0, -t * phis[a]) * c)
        .collect();
    Ok(SpectralField::from_parts(grid, coeffs))
}

fn simpson_weight(q: usize, steps: usize) -> f64 {
    if q == 0 || q == steps {
        1.0 / 3.0
    } else if q % 2 == 1 {
        4.0 / 3.0
    } else {
        2.0 / 3.0
    }
}

/// Second iterate by time quadrature,
/// `-i int_0^t S(t-t') phi(D)[S(t') h]^2 dt'` (twice the bilinear Duhamel
/// integral of the free trajectory with itself), Simpson with `steps` panels.
pub fn i2_duhamel(h: &SpectralField, t: f64, steps: usize) -> Result<SpectralField> {
    if !t.is_finite() || t < 0.0 {
        return Err(SpectralError::InvalidConfig(format!("t = {t} must be >= 0")));
    }
    check_support_guard(h)?;
    if t == 0.0 {
        return Ok(SpectralField::zero(*h.grid()));
    }
    check_even_steps(steps)?;
    let free = Trajectory::free(h, t, steps);
    Ok(duhamel(&free, &free)?.scale(Complex64::new(2.0, 0.0)))
}

/// Second iterate in closed form: for each output node `xi`,
///
/// `-i e^{-i t phi(xi)} phi(xi) * (w / sqrt(2 pi)) *
///  sum_{xi1} h(xi1) h(xi - xi1) * t psi(-i t theta(xi, xi1))`
///
/// with the inner lattice refined by the integer factor `refine` (spectra
/// interpolated linearly between nodes, exact for indicator data away from
/// box edges, `w = delta_xi / refine`). Exact in time; with `refine = 1` it
/// shares the lattice sum of [`i2_duhamel`] and differs only by Simpson
/// error.
pub fn i2_closed_form(h: &SpectralField, t: f64, refine: usize) -> Result<SpectralField> {
    if !t.is_finite() || t < 0.0 {
        return Err(SpectralError::InvalidConfig(format!("t = {t} must be >= 0")));
    }
    if refine < 1 {
        return Err(SpectralError::InvalidConfig("refine must be >= 1".into()));
    }
    check_support_guard(h)?;
    let grid = *h.grid();
    if t == 0.0 {
        return Ok(SpectralField::zero(grid));
    }

    let m = grid.half_modes();
    let r = refine;
    let rm = m * r;
    let rn = 2 * rm + 1;
    let rdxi = grid.delta_xi() / r as f64;

    // refined spectrum, linear between nodes
    let coarse = h.coeffs();
    let mut refined = vec![ZERO; rn];
    for (i, slot) in refined.iter_mut().enumerate() {
        let (quot, rem) = (i / r, i % r);
        *slot = if rem == 0 {
            coarse[quot]
        } else {
            let frac = rem as f64 / r as f64;
            coarse[quot] * (1.0 - frac) + coarse[quot + 1] * frac
        };
    }
    let live: Vec<usize> = (0..rn).filter(|&i| refined[i] != ZERO).collect();

    let weight = rdxi * FOURIER_NORM;
    let coeffs: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|a| {
            let xi = grid.xi_at(a);
            let p = phi(xi);
            if p == 0.0 {
                return ZERO; // the multiplier kills the zero mode outright
            }
            let j = a as i64 - m as i64;
            let mut sum = ZERO;
            for &i in &live {
                let partner = j * r as i64 - i as i64 + 2 * rm as i64;
                if partner < 0 || partner >= rn as i64 {
                    continue;
                }
                let xi1 = (i as i64 - rm as i64) as f64 * rdxi;
                let theta = theta_direct(xi, xi1);
                let kernel = t * psi_kernel(Complex64::new(0.0, -t * theta));
                sum += refined[i] * refined[partner as usize] * kernel;
            }
            MINUS_I * p * Complex64::from_polar(1.0, -t * p) * sum * weight
        })
        .collect();
    Ok(SpectralField::from_parts(grid, coeffs))
}

/// The near-resonant internal frequencies feeding output `xi`: the set of
/// `xi1` with `xi1` in one band of the data at `+-N` and `xi - xi1` in the
/// other. One closed interval around each of `+N` and `-N`.
#[derive(Debug, Clone, PartialEq)]
pub struct AXiSet {
    intervals: Vec<(f64, f64)>,
}

/// Computes the interaction set for `|xi| <= 1/2` (the output regime where
/// the quadratic interaction of the bands at `+-N` lands).
pub fn a_xi_set(xi: f64, n: f64) -> AXiSet {
    assert!(
        xi.abs() <= 0.5 + 1e-12,
        "a_xi_set is meant for |xi| <= 1/2, got {xi}"
    );
    let mut intervals = Vec::with_capacity(2);
    // xi1 in [N-1, N+1], xi - xi1 in [-N-1, -N+1]
    let lo = (n - 1.0).max(xi + n - 1.0);
    let hi = (n + 1.0).min(xi + n + 1.0);
    if hi > lo {
        intervals.push((lo, hi));
    }
    // mirrored pair
    let lo = (-n - 1.0).max(xi - n - 1.0);
    let hi = (-n + 1.0).min(xi - n + 1.0);
    if hi > lo {
        intervals.push((lo, hi));
    }
    AXiSet { intervals }
}

impl AXiSet {
    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }
}

/// Power-series terms of the flow map in the data amplitude: `terms[k]`
/// holds `I_k` with `I_1 = S(t) h` and
/// `I_k = sum_{j+l=k} duhamel(I_j, I_l)` over ordered pairs, each term
/// evaluated at `t_final`.
#[derive(Debug, Clone)]
pub struct PicardExpansion {
    t_final: f64,
    terms: Vec<SpectralField>,
}

impl PicardExpansion {
    /// Runs the recursion up to `order` on a `steps`-panel time lattice.
    ///
    /// The recursion needs `int_0^{t_q}` at every lattice node: even `q` use
    /// composite Simpson on `0..q`; odd `q` append one trapezoid panel to the
    /// Simpson value at `q - 1`, an O(dt^2) local correction that only enters
    /// terms of order >= 3.
    pub fn compute(
        h: &SpectralField,
        t_final: f64,
        order: usize,
        steps: usize,
    ) -> Result<Self> {
        if order < 2 {
            return Err(SpectralError::InvalidConfig(format!(
                "expansion order must be >= 2, got {order}"
            )));
        }
        if !t_final.is_finite() || t_final < 0.0 {
            return Err(SpectralError::InvalidConfig(format!(
                "t_final = {t_final} must be >= 0"
            )));
        }
        check_support_guard(h)?;
        let grid = *h.grid();
        if t_final == 0.0 {
            let mut terms = vec![h.clone()];
            terms.resize(order, SpectralField::zero(grid));
            return Ok(Self { t_final, terms });
        }
        check_even_steps(steps)?;
        let n = grid.len();
        if n.saturating_mul(steps + 1).saturating_mul(order) > PICARD_BUDGET {
            return Err(SpectralError::BudgetExceeded(format!(
                "{n} nodes x {} time samples x {order} terms",
                steps + 1
            )));
        }

        let dt = t_final / steps as f64;
        let phis: Vec<f64> = grid.nodes().map(phi).collect();
        let conv = Convolver::new(n);
        let scale = grid.node_weight() * FOURIER_NORM;

        let mut trajectories: Vec<Trajectory> = vec![Trajectory::free(h, t_final, steps)];

        for k in 2..=order {
            // integrand P_q = sum over ordered (j, l), j + l = k, of
            // I_j(t_q) I_l(t_q); the product is symmetric, so unordered
            // pairs with multiplicity 2 off the diagonal.
            let mut integrand: Vec<Vec<Complex64>> = vec![vec![ZERO; n]; steps + 1];
            for j in 1..=k / 2 {
                let l = k - j;
                let mult = if j == l { 1.0 } else { 2.0 };
                let (tj, tl) = (&trajectories[j - 1], &trajectories[l - 1]);
                let pair: Vec<Vec<Complex64>> = (0..=steps)
                    .into_par_iter()
                    .map(|q| conv.convolve(tj.field(q).coeffs(), tl.field(q).coeffs(), scale))
                    .collect();
                for (acc, p) in integrand.iter_mut().zip(pair) {
                    for (a, v) in acc.iter_mut().zip(p) {
                        *a += mult * v;
                    }
                }
            }

            // twist into the stationary frame: G_q = e^{i t_q phi} P_q
            for (q, row) in integrand.iter_mut().enumerate() {
                let tq = q as f64 * dt;
                for (a, v) in row.iter_mut().enumerate() {
                    *v *= Complex64::from_polar(1.0, tq * phis[a]);
                }
            }

            // cumulative quadrature over the lattice prefix, then untwist
            let mut fields = Vec::with_capacity(steps + 1);
            fields.push(SpectralField::zero(grid));
            let mut c_even = vec![ZERO; n]; // value at the last even node
            let mut c_curr = vec![ZERO; n];
            for q in 1..=steps {
                let tq = q as f64 * dt;
                if q.is_multiple_of(2) {
                    for a in 0..n {
                        c_even[a] += dt / 3.0
                            * (integrand[q - 2][a]
                                + 4.0 * integrand[q - 1][a]
                                + integrand[q][a]);
                    }
                    c_curr.copy_from_slice(&c_even);
                } else {
                    for a in 0..n {
                        c_curr[a] =
                            c_even[a] + 0.5 * dt * (integrand[q - 1][a] + integrand[q][a]);
                    }
                }
                let coeffs = (0..n)
                    .map(|a| {
                        0.5 * MINUS_I
                            * phis[a]
                            * Complex64::from_polar(1.0, -tq * phis[a])
                            * c_curr[a]
                    })
                    .collect();
                fields.push(SpectralField::from_parts(grid, coeffs));
            }
            trajectories.push(Trajectory::from_fields(dt, fields)?);
        }

        let terms = trajectories
            .iter()
            .map(|t| t.final_field().clone())
            .collect();
        Ok(Self { t_final, terms })
    }

    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Term `I_k`, 1-based.
    pub fn term(&self, k: usize) -> &SpectralField {
        assert!(
            (1..=self.terms.len()).contains(&k),
            "term index {k} outside 1..={}",
            self.terms.len()
        );
        &self.terms[k - 1]
    }

    /// `sum_{k=1}^{K} eps^k I_k`, the truncated flow at amplitude `eps`.
    pub fn series_sum(&self, eps: f64) -> SpectralField {
        self.series_sum_to(eps, self.terms.len())
    }

    /// Partial sum up to `k_max` terms.
    pub fn series_sum_to(&self, eps: f64, k_max: usize) -> SpectralField {
        let k_max = k_max.min(self.terms.len());
        self.weighted_sum(eps, 1, k_max)
    }

    /// Sobolev norm of the series tail `sum_{k=from_k}^{K} eps^k I_k`.
    pub fn tail_norm(&self, eps: f64, from_k: usize, s: f64) -> f64 {
        if from_k > self.terms.len() {
            return 0.0;
        }
        self.weighted_sum(eps, from_k.max(1), self.terms.len()).hs_norm(s)
    }

    fn weighted_sum(&self, eps: f64, from_k: usize, to_k: usize) -> SpectralField {
        let grid = *self.terms[0].grid();
        let mut acc = vec![ZERO; grid.len()];
        for k in from_k..=to_k {
            let w = eps.powi(k as i32);
            for (a, c) in acc.iter_mut().zip(self.terms[k - 1].coeffs()) {
                *a += w * c;
            }
        }
        SpectralField::from_parts(grid, acc)
    }
}

//! Fully nonlinear time evolution of `i u_t = phi(D) u + (1/2) phi(D) u^2`
//! by classical RK4 on the coefficient vector.
//!
//! The multiplier is bounded (`|phi| <= 1/2`), so the linear part is not
//! stiff and plain RK4 is accuracy-limited: no integrating factor needed.
//! Hermitian symmetry is re-checked after every step and a violation is an
//! error, never a silent re-symmetrization, because a drifting symmetry is
//! exactly the kind of convolution bug the dual-route iterate tests exist to
//! catch.

use crate::conv::Convolver;
use crate::error::{Result, SpectralError};
use crate::field::{hermitian_deviation, hermitian_threshold, SpectralField};
use crate::picard::Trajectory;
use crate::symbols::phi;
use crate::FOURIER_NORM;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Rk4,
}

/// Time-stepping parameters; `dt * n_steps` is the final time.
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub scheme: Scheme,
    /// Every how many steps to run the cheap blowup check (0 = off).
    pub conservation_check_every: usize,
    /// Keep every `store_every`-th step in the trajectory (must divide
    /// `n_steps`); 1 stores every step, which `residual_ivp1` wants.
    pub store_every: usize,
}

impl SolverConfig {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !dt.is_finite() || dt <= 0.0 || dt > 0.1 {
            return Err(SpectralError::InvalidConfig(format!(
                "dt = {dt} outside (0, 0.1]"
            )));
        }
        if n_steps == 0 {
            return Err(SpectralError::InvalidConfig("n_steps = 0".into()));
        }
        Ok(Self {
            dt,
            n_steps,
            scheme: Scheme::Rk4,
            conservation_check_every: 100,
            store_every: 1,
        })
    }

    /// Steps an interval `[0, t_final]` with spacing as close to `dt_target`
    /// as an integer step count allows (landing on `t_final` exactly).
    pub fn for_interval(dt_target: f64, t_final: f64) -> Result<Self> {
        if !t_final.is_finite() || t_final <= 0.0 {
            return Err(SpectralError::InvalidConfig(format!(
                "t_final = {t_final} must be positive"
            )));
        }
        let n = (t_final / dt_target).ceil().max(1.0) as usize;
        Self::new(t_final / n as f64, n)
    }

    pub fn with_store_every(mut self, every: usize) -> Result<Self> {
        if every == 0 || !self.n_steps.is_multiple_of(every) {
            return Err(SpectralError::InvalidConfig(format!(
                "store_every = {every} must divide n_steps = {}",
                self.n_steps
            )));
        }
        self.store_every = every;
        Ok(self)
    }

    pub fn t_final(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

/// Right side in coefficient form,
/// `u_t(xi) = -i phi(xi) (u(xi) + spectrum(u^2)(xi) / 2)`.
/// The zero mode is annihilated exactly (`phi(0) = 0`), so the mean is a
/// trivially conserved quantity of the scheme, not just of the equation.
pub fn rhs(u: &SpectralField) -> Result<SpectralField> {
    let limit = 0.5 * u.grid().xi_max() + 1e-9 * u.grid().delta_xi();
    let support = u.support_radius();
    if support > limit {
        return Err(SpectralError::SupportOverflow { support, limit });
    }
    let conv = Convolver::new(u.grid().len());
    Ok(rhs_field(u, &conv))
}

fn rhs_field(u: &SpectralField, conv: &Convolver) -> SpectralField {
    let grid = *u.grid();
    let scale = grid.node_weight() * FOURIER_NORM;
    let squared = conv.convolve(u.coeffs(), u.coeffs(), scale);
    let coeffs = u
        .coeffs()
        .iter()
        .zip(&squared)
        .enumerate()
        .map(|(a, (c, sq))| {
            let p = phi(grid.xi_at(a));
            Complex64::new(0.0, -p) * (c + 0.5 * sq)
        })
        .collect();
    SpectralField::from_parts(grid, coeffs)
}

fn rhs_raw(
    grid_phis: &[f64],
    coeffs: &[Complex64],
    conv: &Convolver,
    scale: f64,
) -> Vec<Complex64> {
    let squared = conv.convolve(coeffs, coeffs, scale);
    coeffs
        .iter()
        .zip(&squared)
        .zip(grid_phis)
        .map(|((c, sq), &p)| Complex64::new(0.0, -p) * (c + 0.5 * sq))
        .collect()
}

/// Integrates the multiplier-form equation from `u0` and returns the stored
/// trajectory. Fails on non-hermitian or over-wide data, on NaN blowup, and
/// on any hermitian drift beyond the detection tolerance.
///
/// Interior products are exact dealiased convolutions projected back onto
/// the grid; the entry guard keeps the dominant quadratic interactions
/// on-grid, while the spectrum the evolution itself generates beyond that is
/// the usual Galerkin truncation.
pub fn evolve(u0: &SpectralField, cfg: &SolverConfig) -> Result<Trajectory> {
    if !u0.is_hermitian() {
        return Err(SpectralError::SymmetryViolation {
            deviation: hermitian_deviation(u0.coeffs()),
            t: 0.0,
        });
    }
    let limit = 0.5 * u0.grid().xi_max() + 1e-9 * u0.grid().delta_xi();
    let support = u0.support_radius();
    if support > limit {
        return Err(SpectralError::SupportOverflow { support, limit });
    }
    let Scheme::Rk4 = cfg.scheme;

    let grid = *u0.grid();
    let n = grid.len();
    let phis: Vec<f64> = grid.nodes().map(phi).collect();
    let conv = Convolver::new(n);
    let scale = grid.node_weight() * FOURIER_NORM;
    let dt = cfg.dt;

    let h1_start = invariant_h1(u0);
    let mut u = u0.coeffs().to_vec();
    let mut stored = Vec::with_capacity(cfg.n_steps / cfg.store_every + 1);
    stored.push(u0.clone());

    for step in 1..=cfg.n_steps {
        let k1 = rhs_raw(&phis, &u, &conv, scale);
        let stage2: Vec<Complex64> = u
            .iter()
            .zip(&k1)
            .map(|(c, k)| c + 0.5 * dt * k)
            .collect();
        let k2 = rhs_raw(&phis, &stage2, &conv, scale);
        let stage3: Vec<Complex64> = u
            .iter()
            .zip(&k2)
            .map(|(c, k)| c + 0.5 * dt * k)
            .collect();
        let k3 = rhs_raw(&phis, &stage3, &conv, scale);
        let stage4: Vec<Complex64> = u.iter().zip(&k3).map(|(c, k)| c + dt * k).collect();
        let k4 = rhs_raw(&phis, &stage4, &conv, scale);

        for (a, c) in u.iter_mut().enumerate() {
            *c += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        }

        let t = step as f64 * dt;
        if u.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SpectralError::Blowup {
                t,
                what: "non-finite coefficient".into(),
            });
        }
        let dev = hermitian_deviation(&u);
        if dev > hermitian_threshold(&u) {
            return Err(SpectralError::SymmetryViolation { deviation: dev, t });
        }
        if cfg.conservation_check_every > 0 && step % cfg.conservation_check_every == 0 {
            let h1: f64 = u
                .iter()
                .enumerate()
                .map(|(a, c)| (1.0 + grid.xi_at(a).powi(2)) * c.norm_sqr())
                .sum::<f64>()
                * grid.node_weight();
            if h1 > 1e12 * (1.0 + h1_start) {
                return Err(SpectralError::Blowup {
                    t,
                    what: format!("H1 functional grew to {h1:.3e}"),
                });
            }
        }
        if step % cfg.store_every == 0 {
            stored.push(SpectralField::from_parts(grid, u.clone()));
        }
    }

    Trajectory::from_fields(dt * cfg.store_every as f64, stored)
}

/// Conserved mean `int u dx = sqrt(2 pi) * Re c_0`.
pub fn invariant_mean(u: &SpectralField) -> f64 {
    std::f64::consts::TAU.sqrt() * u.coeff(0).re
}

/// Conserved quadratic functional `int (u^2 + u_x^2) dx`, i.e. the squared
/// H^1 norm of the spectrum.
pub fn invariant_h1(u: &SpectralField) -> f64 {
    u.hs_norm(1.0).powi(2)
}

/// Maximum over interior time nodes of the L2 norm of
/// `(1 + xi^2) u_t + i xi u + (i xi / 2) spectrum(u^2)`,
/// with `u_t` from 4th-order central differences in time. Small values
/// certify that the computed trajectory solves the original equation
/// `u_t - u_xxt + u_x + u u_x = 0`, not just the multiplier rewrite.
pub fn residual_ivp1(traj: &Trajectory) -> Result<f64> {
    let q = traj.steps();
    if q + 1 < 5 {
        return Err(SpectralError::LatticeMismatch(format!(
            "residual needs at least 5 time nodes, got {}",
            q + 1
        )));
    }
    let grid = *traj.grid();
    let n = grid.len();
    let conv = Convolver::new(n);
    let scale = grid.node_weight() * FOURIER_NORM;
    let dt = traj.dt();
    let w = grid.node_weight();

    let mut worst = 0.0f64;
    for mid in 2..=q - 2 {
        let sq = conv.convolve(traj.field(mid).coeffs(), traj.field(mid).coeffs(), scale);
        let mut acc = 0.0;
        for (a, sq_a) in sq.iter().enumerate().take(n) {
            let xi = grid.xi_at(a);
            let ut = (-traj.field(mid + 2).coeffs()[a] + 8.0 * traj.field(mid + 1).coeffs()[a]
                - 8.0 * traj.field(mid - 1).coeffs()[a]
                + traj.field(mid - 2).coeffs()[a])
                / (12.0 * dt);
            let r = (1.0 + xi * xi) * ut
                + Complex64::new(0.0, xi) * (traj.field(mid).coeffs()[a] + 0.5 * sq_a);
            acc += r.norm_sqr();
        }
        worst = worst.max((acc * w).sqrt());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;

    const ZERO: Complex64 = Complex64::new(0.0, 0.0);

    fn gaussian(grid: FrequencyGrid, amp: f64) -> SpectralField {
        SpectralField::from_symbol(grid, |xi| Complex64::new(amp * (-xi * xi).exp(), 0.0))
            .unwrap()
    }

    fn small_grid() -> FrequencyGrid {
        FrequencyGrid::line(128, 0.125).unwrap() // xi_max = 16
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = small_grid();
        let cfg = SolverConfig::new(0.01, 50).unwrap();
        let traj = evolve(&SpectralField::zero(g), &cfg).unwrap();
        for f in traj.fields() {
            assert_eq!(f.max_abs(), 0.0);
        }
    }

    #[test]
    fn rhs_structure() {
        let g = small_grid();
        assert_eq!(rhs(&SpectralField::zero(g)).unwrap().max_abs(), 0.0);

        // single hermitian pair: the linear part scales by -i phi(xi0)
        let m = g.half_modes() as i64;
        let mut c = vec![ZERO; g.len()];
        c[(m + 8) as usize] = Complex64::new(0.3, 0.0); // xi0 = 1
        c[(m - 8) as usize] = Complex64::new(0.3, 0.0);
        let u = SpectralField::from_coeffs(g, c).unwrap();
        let r = rhs(&u).unwrap();
        let expect_lin = Complex64::new(0.0, -phi(1.0)) * Complex64::new(0.3, 0.0);
        // quadratic part feeds 0 and +-2 xi0, not +-xi0
        assert!((r.coeff(8) - expect_lin).norm() < 1e-14);
        assert_eq!(r.coeff(0), ZERO);
    }

    #[test]
    fn rk4_self_convergence_order() {
        let g = small_grid();
        let u0 = gaussian(g, 0.8);
        let t = 2.0;
        let sol = |dt: f64| {
            let cfg = SolverConfig::for_interval(dt, t).unwrap();
            evolve(&u0, &cfg).unwrap().final_field().clone()
        };
        let a = sol(0.1);
        let b = sol(0.05);
        let c = sol(0.025);
        let e1 = a.sub(&b).unwrap().l2_norm();
        let e2 = b.sub(&c).unwrap().l2_norm();
        let order = (e1 / e2).log2();
        assert!(order > 3.8, "observed order {order:.2}");
        assert!(order < 4.6, "suspicious superconvergence {order:.2}");
    }

    #[test]
    fn mean_is_machine_conserved() {
        let g = small_grid();
        let u0 = gaussian(g, 0.8);
        let m0 = invariant_mean(&u0);
        let cfg = SolverConfig::new(0.01, 100).unwrap();
        let traj = evolve(&u0, &cfg).unwrap();
        for f in traj.fields() {
            assert!((invariant_mean(f) - m0).abs() <= 1e-14 * m0.abs().max(1.0));
        }
    }

    #[test]
    fn h1_functional_drift_is_tiny() {
        let g = small_grid();
        let u0 = gaussian(g, 0.7); // H1 norm below 1
        assert!(invariant_h1(&u0).sqrt() <= 1.0);
        let cfg = SolverConfig::for_interval(1e-3, 1.0).unwrap();
        let traj = evolve(&u0, &cfg).unwrap();
        let h0 = invariant_h1(traj.field(0));
        let drift = traj
            .fields()
            .iter()
            .map(|f| (invariant_h1(f) - h0).abs() / h0)
            .fold(0.0, f64::max);
        assert!(drift <= 1e-8, "relative H1 drift {drift:.3e}");
    }

    #[test]
    fn forward_backward_returns() {
        let g = small_grid();
        let u0 = gaussian(g, 0.8);
        let fwd = {
            let cfg = SolverConfig::for_interval(1e-3, 0.5).unwrap();
            evolve(&u0, &cfg).unwrap().final_field().clone()
        };
        // integrate the reverse-time equation by flipping x (phi is odd)
        let flipped = SpectralField::from_coeffs(
            *fwd.grid(),
            fwd.coeffs().iter().rev().cloned().collect(),
        )
        .unwrap();
        let back = {
            let cfg = SolverConfig::for_interval(1e-3, 0.5).unwrap();
            evolve(&flipped, &cfg).unwrap().final_field().clone()
        };
        let unflipped = SpectralField::from_coeffs(
            *back.grid(),
            back.coeffs().iter().rev().cloned().collect(),
        )
        .unwrap();
        let err = unflipped.sub(&u0).unwrap().l2_norm();
        assert!(err <= 1e-8, "return error {err:.3e}");
    }

    #[test]
    fn residual_of_smooth_trajectory() {
        let g = small_grid();
        let u0 = gaussian(g, 0.8);
        let cfg = SolverConfig::for_interval(1e-3, 0.1).unwrap();
        let res = residual_ivp1(&evolve(&u0, &cfg).unwrap()).unwrap();
        assert!(res <= 1e-8, "residual {res:.3e}");
    }

    #[test]
    fn residual_converges_at_fourth_order() {
        // Larger amplitude and steps keep the dt^4 signal far above the
        // eps/dt differencing floor, where the order is measurable.
        let g = small_grid();
        let u0 = gaussian(g, 2.0);
        let run = |dt: f64| {
            let cfg = SolverConfig::for_interval(dt, 0.2).unwrap();
            residual_ivp1(&evolve(&u0, &cfg).unwrap()).unwrap()
        };
        let coarse = run(8e-3);
        let fine = run(4e-3);
        let order = (coarse / fine).log2();
        assert!(order >= 3.5, "residual order {order:.2} ({coarse:.3e} -> {fine:.3e})");
    }

    #[test]
    fn residual_of_zero_and_short_trajectories() {
        let g = small_grid();
        let cfg = SolverConfig::new(0.01, 8).unwrap();
        let traj = evolve(&SpectralField::zero(g), &cfg).unwrap();
        assert_eq!(residual_ivp1(&traj).unwrap(), 0.0);

        let short = SolverConfig::new(0.01, 3).unwrap();
        let traj = evolve(&SpectralField::zero(g), &short).unwrap();
        assert!(residual_ivp1(&traj).is_err());
    }

    #[test]
    fn h1_functional_of_band_data() {
        // weight (1 + xi^2) ~ 1 + N^2 over two bands of total measure 4
        let g = FrequencyGrid::line(4096, 1.0 / 16.0).unwrap();
        let f = crate::data::phi_sharp(64.0, &g).unwrap();
        let h1 = invariant_h1(&f);
        let expect = 4.0 * (1.0 + 64.0 * 64.0);
        assert!((h1 - expect).abs() / expect < 0.05, "h1 = {h1}, expect {expect}");
        assert_eq!(invariant_mean(&f), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.2, 10).is_err());
        assert!(SolverConfig::new(-0.01, 10).is_err());
        assert!(SolverConfig::new(0.01, 0).is_err());
        assert!(SolverConfig::new(0.01, 10)
            .unwrap()
            .with_store_every(3)
            .is_err());
        let cfg = SolverConfig::for_interval(1e-3, 0.5).unwrap();
        assert!((cfg.t_final() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian_data() {
        let g = small_grid();
        let mut c = vec![ZERO; g.len()];
        c[g.half_modes() + 4] = Complex64::new(1.0, 0.0); // one-sided
        let u0 = SpectralField::from_coeffs(g, c).unwrap();
        let cfg = SolverConfig::new(0.01, 10).unwrap();
        assert!(matches!(
            evolve(&u0, &cfg),
            Err(SpectralError::SymmetryViolation { .. })
        ));
    }

    #[test]
    fn trajectory_thinning() {
        let g = small_grid();
        let u0 = gaussian(g, 0.5);
        let cfg = SolverConfig::new(0.01, 100)
            .unwrap()
            .with_store_every(10)
            .unwrap();
        let traj = evolve(&u0, &cfg).unwrap();
        assert_eq!(traj.steps(), 10);
        assert!((traj.dt() - 0.1).abs() < 1e-15);
    }
}

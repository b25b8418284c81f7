//! Uniform symmetric frequency lattices.

use crate::error::{Result, SpectralError};

/// How the lattice is interpreted.
///
/// `LineApprox` treats the lattice as a torus of period `2*pi/delta_xi` used
/// as a line approximation: sums over nodes carry the Riemann weight
/// `delta_xi`. `Periodic` is the honest torus of period `2*pi` with integer
/// wavenumbers and unit weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    LineApprox,
    Periodic,
}

impl GridMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridMode::LineApprox => "line_approx",
            GridMode::Periodic => "periodic",
        }
    }
}

/// Frequencies `xi_j = j * delta_xi` for `j in [-M, M]`, `2M + 1` nodes total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    half_modes: usize,
    delta_xi: f64,
    mode: GridMode,
}

impl FrequencyGrid {
    /// Builds a grid. Rejects `half_modes < 4`, non-positive or non-finite
    /// spacing, and periodic grids with `delta_xi != 1`.
    pub fn new(half_modes: usize, delta_xi: f64, mode: GridMode) -> Result<Self> {
        if half_modes < 4 {
            return Err(SpectralError::InvalidGrid(format!(
                "need at least 4 half modes, got {half_modes}"
            )));
        }
        if !delta_xi.is_finite() || delta_xi <= 0.0 {
            return Err(SpectralError::InvalidGrid(format!(
                "delta_xi must be a positive real, got {delta_xi}"
            )));
        }
        if mode == GridMode::Periodic && delta_xi != 1.0 {
            return Err(SpectralError::InvalidGrid(format!(
                "periodic mode requires delta_xi = 1, got {delta_xi}"
            )));
        }
        Ok(Self {
            half_modes,
            delta_xi,
            mode,
        })
    }

    pub fn line(half_modes: usize, delta_xi: f64) -> Result<Self> {
        Self::new(half_modes, delta_xi, GridMode::LineApprox)
    }

    pub fn periodic(half_modes: usize) -> Result<Self> {
        Self::new(half_modes, 1.0, GridMode::Periodic)
    }

    pub fn half_modes(&self) -> usize {
        self.half_modes
    }

    /// Number of nodes, `2M + 1`.
    pub fn len(&self) -> usize {
        2 * self.half_modes + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn delta_xi(&self) -> f64 {
        self.delta_xi
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    /// Largest resolved frequency `M * delta_xi`.
    pub fn xi_max(&self) -> f64 {
        self.half_modes as f64 * self.delta_xi
    }

    /// Frequency of signed node index `j in [-M, M]`.
    pub fn xi(&self, j: i64) -> f64 {
        debug_assert!(j.unsigned_abs() as usize <= self.half_modes);
        j as f64 * self.delta_xi
    }

    /// Frequency at array position `a in [0, 2M]` (node `j = a - M`).
    pub fn xi_at(&self, a: usize) -> f64 {
        (a as i64 - self.half_modes as i64) as f64 * self.delta_xi
    }

    /// Quadrature weight of one node: `delta_xi` on the line lattice, 1 on
    /// the torus (where `delta_xi = 1` anyway, so the two coincide).
    pub fn node_weight(&self) -> f64 {
        self.delta_xi
    }

    /// Physical period represented by the lattice, `2*pi/delta_xi`.
    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.delta_xi
    }

    /// Node frequencies in ascending order.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        let m = self.half_modes as i64;
        (-m..=m).map(move |j| j as f64 * self.delta_xi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_lattice_nodes() {
        let g = FrequencyGrid::line(4, 0.5).unwrap();
        let nodes: Vec<f64> = g.nodes().collect();
        assert_eq!(nodes.len(), 9);
        assert_eq!(nodes[0], -2.0);
        assert_eq!(nodes[4], 0.0);
        assert_eq!(nodes[8], 2.0);
        assert_eq!(g.xi(3), 1.5);
        assert_eq!(g.xi_max(), 2.0);
    }

    #[test]
    fn periodic_wavenumbers() {
        let g = FrequencyGrid::periodic(8).unwrap();
        assert_eq!(g.len(), 17);
        assert_eq!(g.xi(-8), -8.0);
        assert_eq!(g.xi(8), 8.0);
        assert_eq!(g.node_weight(), 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FrequencyGrid::line(4, -1.0).is_err());
        assert!(FrequencyGrid::line(4, 0.0).is_err());
        assert!(FrequencyGrid::line(3, 0.5).is_err());
        assert!(FrequencyGrid::new(8, 0.5, GridMode::Periodic).is_err());
        assert!(FrequencyGrid::line(4, f64::NAN).is_err());
    }

    #[test]
    fn period_matches_spacing() {
        let g = FrequencyGrid::line(16, 0.125).unwrap();
        assert!((g.period() - 16.0 * std::f64::consts::PI).abs() < 1e-12);
    }
}

//! Exact dealiased lattice convolution via zero-padded FFTs.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

/// Linear convolution of two length-`2M+1` coefficient vectors, computed on
/// a zero-padded transform of at least twice that length so no wraparound
/// (aliasing) can occur, then truncated back to the central `2M+1` nodes.
///
/// Index convention: position `a` holds node `j = a - M`; the full linear
/// convolution lives at shifted positions `j + 2M`, of which `[M, 3M]` are
/// kept.
pub struct Convolver {
    n: usize,
    padded: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Convolver {
    pub fn new(n: usize) -> Self {
        let padded = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        Self {
            n,
            padded,
            forward: planner.plan_fft_forward(padded),
            inverse: planner.plan_fft_inverse(padded),
        }
    }

    /// `out[a] = scale * sum_k u[k] v[a + M - k]` over in-range `k`.
    pub fn convolve(&self, u: &[Complex64], v: &[Complex64], scale: f64) -> Vec<Complex64> {
        assert_eq!(u.len(), self.n);
        assert_eq!(v.len(), self.n);
        let zero = Complex64::new(0.0, 0.0);

        let mut a = vec![zero; self.padded];
        let mut b = vec![zero; self.padded];
        a[..self.n].copy_from_slice(u);
        b[..self.n].copy_from_slice(v);
        self.forward.process(&mut a);
        self.forward.process(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y;
        }
        self.inverse.process(&mut a);

        let norm = scale / self.padded as f64;
        let m = self.n / 2; // n = 2M + 1
        (0..self.n).map(|i| a[m + i] * norm).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn direct(u: &[Complex64], v: &[Complex64], scale: f64) -> Vec<Complex64> {
        let n = u.len();
        let m = (n / 2) as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for j in -m..=m {
            let mut s = Complex64::new(0.0, 0.0);
            for k in -m..=m {
                let l = j - k;
                if l.abs() <= m {
                    s += u[(k + m) as usize] * v[(l + m) as usize];
                }
            }
            out[(j + m) as usize] = s * scale;
        }
        out
    }

    #[test]
    fn matches_double_loop() {
        let n = 17;
        let u: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let v: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new((i as f64 * 0.71).cos(), (i as f64 * 0.53).sin()))
            .collect();
        let fast = Convolver::new(n).convolve(&u, &v, 0.25);
        let slow = direct(&u, &v, 0.25);
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).norm() < 1e-12);
        }
    }

    #[test]
    fn point_masses_add_frequencies() {
        // masses at j = +-2 convolve to {-4, 0, +4}
        let n = 11;
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        u[7] = Complex64::new(1.0, 0.0); // j = 2
        u[3] = Complex64::new(1.0, 0.0); // j = -2
        let p = Convolver::new(n).convolve(&u, &u, 1.0);
        for (i, c) in p.iter().enumerate() {
            let j = i as i64 - 5;
            let expect = match j {
                -4 | 4 => 1.0,
                0 => 2.0,
                _ => 0.0,
            };
            assert!((c.re - expect).abs() < 1e-12, "j = {j}");
            assert!(c.im.abs() < 1e-12);
        }
    }
}

//! Two-level reduction of the superposed search.
//!
//! On a chain, `U²` restricted to span{ψ₁, ψ₃} is the rotation by `θ` with
//! `cos θ = r - t = (N - 4)/N`, the same rotation as a Grover iteration.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::half_steps;
use crate::error::{Error, Result};
use crate::walk::even_steps;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedGroverModel {
    spokes: usize,
    theta: f64,
    n0: f64,
}

impl ReducedGroverModel {
    pub fn new(spokes: usize) -> Result<Self> {
        if spokes < 3 {
            return Err(Error::Sizing(format!("need N >= 3 spokes, got {spokes}")));
        }
        let n = spokes as f64;
        let theta = ((n - 4.0) / n).acos();
        Ok(Self {
            spokes,
            theta,
            n0: PI / (2.0 * theta),
        })
    }

    pub fn spokes(&self) -> usize {
        self.spokes
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Real half-step count with `n₀ θ = π/2`.
    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// Eigenvalues `e^{±iθ}` of the reduced `U²`.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        (Complex64::from_polar(1.0, self.theta), Complex64::from_polar(1.0, -self.theta))
    }

    /// Eigenvectors `(ψ₁ ∓ iψ₃)/√2` in the (ψ₁, ψ₃) basis, matching
    /// [`ReducedGroverModel::eigenvalues`].
    pub fn eigenvectors(&self) -> ([Complex64; 2], [Complex64; 2]) {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        (
            [Complex64::new(h, 0.0), Complex64::new(0.0, -h)],
            [Complex64::new(h, 0.0), Complex64::new(0.0, h)],
        )
    }

    /// Probability on the path after `steps` (even) applications of `U`:
    /// `sin²(nθ)` from ψ₁, `sin²((2n+1)θ/2)` from the superposed start.
    pub fn grover_psuc(&self, steps: u64, from_superposed: bool) -> Result<f64> {
        let n = half_steps(steps)?;
        Ok(self.psuc_continuous(n as f64, from_superposed))
    }

    /// Same law at a real half-step count `n`.
    pub fn psuc_continuous(&self, n: f64, from_superposed: bool) -> f64 {
        let angle = if from_superposed {
            (2.0 * n + 1.0) * self.theta / 2.0
        } else {
            n * self.theta
        };
        angle.sin().powi(2)
    }
}

/// A state `a₁ψ₁ + a₃ψ₃` of the reduced model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedGroverState {
    pub a1: f64,
    pub a3: f64,
    pub theta: f64,
}

impl ReducedGroverState {
    pub fn psi1(model: &ReducedGroverModel) -> Self {
        Self {
            a1: 1.0,
            a3: 0.0,
            theta: model.theta,
        }
    }

    /// `cos(θ/2) ψ₁ + sin(θ/2) ψ₃`.
    pub fn superposed(model: &ReducedGroverModel) -> Self {
        let half = model.theta / 2.0;
        Self {
            a1: half.cos(),
            a3: half.sin(),
            theta: model.theta,
        }
    }

    /// Applies `U^{2n}`.
    pub fn after_double_steps(&self, n: u64) -> Self {
        let (s, c) = (n as f64 * self.theta).sin_cos();
        Self {
            a1: c * self.a1 - s * self.a3,
            a3: s * self.a1 + c * self.a3,
            theta: self.theta,
        }
    }
}

/// Nearest even integer to `π/θ`.
pub fn optimal_steps_superposed(spokes: usize) -> Result<u64> {
    if spokes < 4 {
        return Err(Error::Sizing(format!(
            "superposed search needs N >= 4, got {spokes}"
        )));
    }
    let model = ReducedGroverModel::new(spokes)?;
    Ok(even_steps(PI / model.theta))
}

/// Nearest even integer to `π/√t = π √(N/2)`.
pub fn optimal_steps_localized(spokes: usize) -> Result<u64> {
    if spokes < 3 {
        return Err(Error::Sizing(format!("need N >= 3 spokes, got {spokes}")));
    }
    Ok(even_steps(PI * (spokes as f64 / 2.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_range() {
        let m4 = ReducedGroverModel::new(4).unwrap();
        assert!((m4.theta() - PI / 2.0).abs() < 1e-15);
        for n in [5, 10, 100, 10_000] {
            let t = ReducedGroverModel::new(n).unwrap().theta();
            assert!(t > 0.0 && t < PI / 2.0);
        }
        assert!(ReducedGroverModel::new(2).is_err());
    }

    #[test]
    fn eigenpairs_diagonalize_the_rotation() {
        let model = ReducedGroverModel::new(37).unwrap();
        let (c, s) = (model.theta().cos(), model.theta().sin());
        let (lp, lm) = model.eigenvalues();
        let (vp, vm) = model.eigenvectors();
        for (lam, v) in [(lp, vp), (lm, vm)] {
            // U² (a1, a3) = (c a1 - s a3, s a1 + c a3)
            let image = [v[0] * c - v[1] * s, v[0] * s + v[1] * c];
            assert!((image[0] - lam * v[0]).norm() < 1e-15);
            assert!((image[1] - lam * v[1]).norm() < 1e-15);
        }
    }

    #[test]
    fn psuc_examples() {
        let m4 = ReducedGroverModel::new(4).unwrap();
        assert!((m4.grover_psuc(2, false).unwrap() - 1.0).abs() < 1e-15);
        let m = ReducedGroverModel::new(100).unwrap();
        assert_eq!(m.grover_psuc(0, false).unwrap(), 0.0);
        assert!(m.grover_psuc(3, true).is_err());
        let steps = optimal_steps_superposed(100).unwrap();
        let floor = 1.0 - 8.0 / 100.0 - 2.0 * (2.0f64 / 100.0).sqrt();
        assert!(m.grover_psuc(steps, true).unwrap() >= floor);
    }

    #[test]
    fn reduced_state_matches_closed_form() {
        let model = ReducedGroverModel::new(64).unwrap();
        let start = ReducedGroverState::superposed(&model);
        for n in 0..20 {
            let s = start.after_double_steps(n);
            assert!((s.a1 * s.a1 + s.a3 * s.a3 - 1.0).abs() < 1e-14);
            assert!((s.a3 * s.a3 - model.grover_psuc(2 * n, true).unwrap()).abs() < 1e-14);
            let p = ReducedGroverState::psi1(&model).after_double_steps(n);
            assert!((p.a3 * p.a3 - model.grover_psuc(2 * n, false).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn optimal_step_counts() {
        // cos θ = 446/450 gives π/θ ≈ 23.5
        assert_eq!(optimal_steps_superposed(450).unwrap(), 24);
        assert_eq!(optimal_steps_localized(450).unwrap(), 48);
        assert_eq!(optimal_steps_superposed(4).unwrap(), 2);
        assert!(optimal_steps_superposed(3).is_err());
        assert!(optimal_steps_localized(2).is_err());
    }

    #[test]
    fn large_n_asymptote() {
        let n = 10_000usize;
        let exact = PI / ReducedGroverModel::new(n).unwrap().theta();
        let approx = PI / 2.0 * (n as f64 / 2.0).sqrt();
        assert!((exact - approx).abs() / exact <= 0.01);
        let mut last = f64::INFINITY;
        for n in [16usize, 64, 256, 1024, 4096] {
            let exact = PI / ReducedGroverModel::new(n).unwrap().theta();
            let rel = (exact - PI / 2.0 * (n as f64 / 2.0).sqrt()).abs() / exact;
            assert!(rel < last);
            last = rel;
        }
    }
}

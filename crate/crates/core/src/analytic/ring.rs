//! Bloch spectrum of a ring of stars and the exact amplitude sums it gives.
//!
//! Starting from the connection state `(|A_{k+1},B_{k1}⟩ - |A_k,B_{k1}⟩)/√2`
//! on a ring of `M` stars, the amplitudes on the two success states of the
//! connection `b` positions further on, after `2n` steps, are
//!
//! ```text
//! E±(2n) = 1/(√2 M) Σₘ (1 ∓ tₘ sin φₘ / sin ωₘ) cos(n ωₘ + b φₘ)
//! ```
//!
//! with `φₘ = 2πm/M`, `cos ωₘ = 1 - t(1 - cos φₘ)` and `tₘ = t` except `t₀ = 0`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::bessel::bessel_or_tail;
use super::{bessel_j, half_steps, pairwise_sum, AmplitudePair, MAX_ARGUMENT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RingSpectrum {
    stars: usize,
    spokes: usize,
    t: f64,
    phi: Vec<f64>,
    omega: Vec<f64>,
    // 1 ∓ t_m sin φ_m / sin ω_m
    weight_plus: Vec<f64>,
    weight_minus: Vec<f64>,
}

impl RingSpectrum {
    pub fn new(stars: usize, spokes: usize) -> Result<Self> {
        if stars == 0 {
            return Err(Error::Sizing("a ring needs at least one star".into()));
        }
        if spokes < 3 {
            return Err(Error::Sizing(format!("need N >= 3 spokes, got {spokes}")));
        }
        let t = 2.0 / spokes as f64;
        let mut phi = Vec::with_capacity(stars);
        let mut omega = Vec::with_capacity(stars);
        let mut weight_plus = Vec::with_capacity(stars);
        let mut weight_minus = Vec::with_capacity(stars);
        for m in 0..stars {
            let p = 2.0 * PI * m as f64 / stars as f64;
            // 1 - cos φ = 2 sin²(φ/2), computed without cancellation
            let one_minus_cos = 2.0 * (p / 2.0).sin().powi(2);
            let x = t * one_minus_cos;
            let cos_w = 1.0 - x;
            let sin_w = (x * (2.0 - x)).sqrt();
            phi.push(p);
            omega.push(sin_w.atan2(cos_w));
            if m == 0 {
                weight_plus.push(1.0);
                weight_minus.push(1.0);
            } else {
                let ratio = t * p.sin() / sin_w;
                weight_plus.push(1.0 - ratio);
                weight_minus.push(1.0 + ratio);
            }
        }
        Ok(Self {
            stars,
            spokes,
            t,
            phi,
            omega,
            weight_plus,
            weight_minus,
        })
    }

    pub fn stars(&self) -> usize {
        self.stars
    }

    pub fn spokes(&self) -> usize {
        self.spokes
    }

    pub fn transmission(&self) -> f64 {
        self.t
    }

    pub fn phi(&self, m: usize) -> f64 {
        self.phi[m]
    }

    pub fn omega(&self, m: usize) -> f64 {
        self.omega[m]
    }

    /// `tₘ = (1 - δ_{m,0}) t`.
    pub fn t_m(&self, m: usize) -> f64 {
        if m == 0 {
            0.0
        } else {
            self.t
        }
    }

    /// Amplitudes at a real half-step count `n` (used for integer-step error
    /// scans); `b` is taken modulo `M`.
    pub fn amplitude_at(&self, b: usize, n: f64) -> AmplitudePair {
        let b = (b % self.stars) as f64;
        let cosines: Vec<f64> = (0..self.stars)
            .map(|m| (n * self.omega[m] + b * self.phi[m]).cos())
            .collect();
        let plus: Vec<f64> = cosines.iter().zip(&self.weight_plus).map(|(c, w)| c * w).collect();
        let minus: Vec<f64> = cosines.iter().zip(&self.weight_minus).map(|(c, w)| c * w).collect();
        let scale = FRAC_1_SQRT_2 / self.stars as f64;
        AmplitudePair {
            e_plus: scale * pairwise_sum(&plus),
            e_minus: scale * pairwise_sum(&minus),
        }
    }

    /// Exact amplitudes `b` connections ahead after `steps` (even) steps.
    pub fn ring_amplitude_exact(&self, b: usize, steps: u64) -> Result<AmplitudePair> {
        if b >= self.stars {
            return Err(Error::OutOfRange(format!("offset {b} not below M = {}", self.stars)));
        }
        let n = half_steps(steps)?;
        Ok(self.amplitude_at(b, n as f64))
    }

    pub fn ring_psuc(&self, b: usize, steps: u64) -> Result<f64> {
        self.ring_amplitude_exact(b, steps).map(|a| a.probability())
    }

    /// Bessel approximation of either amplitude with the wave allowed to
    /// travel both ways round: `(1/√2)(J_{2b}(x) + J_{2(M-b)}(x))`.
    pub fn bessel_amplitude(&self, b: usize, steps: u64) -> Result<f64> {
        if b >= self.stars {
            return Err(Error::OutOfRange(format!("offset {b} not below M = {}", self.stars)));
        }
        let n = half_steps(steps)?;
        let x = 2.0 * n as f64 * self.t.sqrt();
        if x > MAX_ARGUMENT {
            return Err(Error::OutOfRange(format!("Bessel argument {x} too large for {steps} steps")));
        }
        Ok(FRAC_1_SQRT_2 * (bessel_or_tail(2 * b, x)? + bessel_or_tail(2 * (self.stars - b), x)?))
    }
}

/// Large-`N`, large-`M` approximation `(1/√2) J_{2b}(2n√t)` of either success
/// amplitude. Valid while `M√N ≫ n`; the caller is responsible for staying in
/// that regime.
pub fn ring_amplitude_approx(b: u32, n: u64, t: f64) -> Result<f64> {
    let order = 2 * b;
    let x = 2.0 * n as f64 * t.sqrt();
    Ok(FRAC_1_SQRT_2 * bessel_j(order, x)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_invariants() {
        for (m, n) in [(5, 20), (8, 32), (11, 450), (2, 3)] {
            let s = RingSpectrum::new(m, n).unwrap();
            assert_eq!(s.omega(0), 0.0);
            assert_eq!(s.t_m(0), 0.0);
            for k in 1..m {
                assert!((s.omega(k) - s.omega(m - k)).abs() < 1e-15);
                assert!(s.omega(k) > 0.0 && s.omega(k) < PI);
                let cos_w = 1.0 - s.transmission() * (1.0 - s.phi(k).cos());
                assert!((s.omega(k).cos() - cos_w).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn small_t_frequency_asymptote() {
        for n in [100usize, 1000, 10_000] {
            let s = RingSpectrum::new(7, n).unwrap();
            let t = s.transmission();
            for k in 1..7 {
                let approx = (2.0 * t * (1.0 - s.phi(k).cos())).sqrt();
                let rel = (s.omega(k) - approx).abs() / s.omega(k);
                assert!(rel <= 2.0 * t, "N={n} m={k} rel={rel}");
            }
        }
    }

    #[test]
    fn initial_amplitudes() {
        for m in [2usize, 5, 11, 40] {
            let s = RingSpectrum::new(m, 50).unwrap();
            let a = s.ring_amplitude_exact(0, 0).unwrap();
            assert!((a.e_plus - FRAC_1_SQRT_2).abs() < 1e-15);
            assert!((a.e_minus - FRAC_1_SQRT_2).abs() < 1e-15);
            assert!((s.ring_psuc(0, 0).unwrap() - 1.0).abs() < 1e-14);
            for b in 1..m {
                assert!(s.ring_psuc(b, 0).unwrap() < 1e-28);
            }
        }
    }

    #[test]
    fn mirror_symmetry_of_offsets() {
        // E±(b) = E∓(M - b)
        let s = RingSpectrum::new(22, 450).unwrap();
        for b in 1..22 {
            for steps in (0..120).step_by(2) {
                let a = s.ring_amplitude_exact(b, steps).unwrap();
                let mirrored = s.ring_amplitude_exact(22 - b, steps).unwrap().swapped();
                assert!((a.e_plus - mirrored.e_plus).abs() < 1e-14);
                assert!((a.e_minus - mirrored.e_minus).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn argument_checks() {
        let s = RingSpectrum::new(5, 20).unwrap();
        assert!(s.ring_amplitude_exact(5, 2).is_err());
        assert!(s.ring_amplitude_exact(1, 3).is_err());
        assert!(RingSpectrum::new(0, 20).is_err());
        assert!(RingSpectrum::new(3, 2).is_err());
    }

    #[test]
    fn bessel_approximation_examples() {
        assert!((ring_amplitude_approx(0, 0, 0.1).unwrap() - FRAC_1_SQRT_2).abs() < 1e-15);
        // 2n√t = π with t = 2/N: n = π √(N/2) / 2; pick t so n = 10 hits it exactly
        let t = (PI / 20.0).powi(2);
        let v = ring_amplitude_approx(1, 10, t).unwrap();
        assert!((v - 0.485_433_932_631_509_25 * FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn bessel_approximation_tracks_exact_sum() {
        let s = RingSpectrum::new(25, 400).unwrap();
        let mut worst: f64 = 0.0;
        for b in 0..=3u32 {
            for n in 0..=60u64 {
                let exact = s.ring_amplitude_exact(b as usize, 2 * n).unwrap();
                let approx = ring_amplitude_approx(b, n, s.transmission()).unwrap();
                worst = worst.max((exact.e_plus - approx).abs()).max((exact.e_minus - approx).abs());
            }
        }
        assert!(worst < 0.02, "worst = {worst}");
    }

    #[test]
    fn two_way_bessel_on_a_short_ring() {
        let s = RingSpectrum::new(6, 400).unwrap();
        let mut worst: f64 = 0.0;
        for b in 0..6 {
            for steps in (0..=80).step_by(2) {
                let exact = s.ring_amplitude_exact(b, steps).unwrap();
                let approx = s.bessel_amplitude(b, steps).unwrap();
                worst = worst.max((exact.probability() - 2.0 * approx * approx).abs());
            }
        }
        assert!(worst < 0.03, "worst = {worst}");
        assert!(s.bessel_amplitude(6, 2).is_err());
    }

    #[test]
    fn quarter_probability_at_the_localized_optimum() {
        let n = 10_000;
        let s = RingSpectrum::new(60, n).unwrap();
        let steps = crate::analytic::optimal_steps_localized(n).unwrap();
        let p = s.ring_psuc(1, steps).unwrap();
        assert!((p - 0.25).abs() < 0.02, "p = {p}");
    }
}

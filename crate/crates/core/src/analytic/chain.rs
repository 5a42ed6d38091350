//! Chain amplitudes through the mirroring ring of `2M` stars.
//!
//! A chain state is the normal half of an antisymmetric state on a ring of
//! twice the length. A walker started at connection `k` becomes the sum of two
//! ring connection states, at ring junctions `k` and `2M - k`, so the chain
//! amplitude at junction `T` is `E^(T-k) + E^(T+k)` (offsets mod `2M`). START
//! and its own mirror coincide, which gives `√2 E^(T)` instead.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use super::bessel::bessel_or_tail;
use super::{half_steps, AmplitudePair, RingSpectrum, MAX_ARGUMENT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    stars: usize,
    ring: RingSpectrum,
}

impl ChainModel {
    pub fn new(stars: usize, spokes: usize) -> Result<Self> {
        if stars == 0 {
            return Err(Error::Sizing("a chain needs at least one star".into()));
        }
        Ok(Self {
            stars,
            ring: RingSpectrum::new(2 * stars, spokes)?,
        })
    }

    pub fn stars(&self) -> usize {
        self.stars
    }

    pub fn spokes(&self) -> usize {
        self.ring.spokes()
    }

    /// The spectrum of the mirroring ring.
    pub fn ring(&self) -> &RingSpectrum {
        &self.ring
    }

    fn check(&self, from: usize, target: usize) -> Result<()> {
        if from >= self.stars {
            return Err(Error::OutOfRange(format!(
                "start connection {from} not in 0..{}",
                self.stars
            )));
        }
        if target > self.stars {
            return Err(Error::OutOfRange(format!(
                "target junction {target} not in 0..={}",
                self.stars
            )));
        }
        Ok(())
    }

    fn offsets(&self, from: usize, target: usize) -> (usize, usize) {
        let l = 2 * self.stars;
        ((target + l - from) % l, (target + from) % l)
    }

    // START has no near edge and END no far edge.
    fn mask(&self, target: usize, a: AmplitudePair) -> AmplitudePair {
        AmplitudePair {
            e_plus: if target == 0 { 0.0 } else { a.e_plus },
            e_minus: if target == self.stars { 0.0 } else { a.e_minus },
        }
    }

    /// Exact amplitudes at junction `target` after `steps` (even) steps,
    /// starting from connection `from` (`0` is START).
    pub fn amplitude(&self, from: usize, target: usize, steps: u64) -> Result<AmplitudePair> {
        self.check(from, target)?;
        let n = half_steps(steps)? as f64;
        let (d1, d2) = self.offsets(from, target);
        let a = if from == 0 {
            self.ring.amplitude_at(d1, n).scaled(SQRT_2)
        } else {
            self.ring.amplitude_at(d1, n) + self.ring.amplitude_at(d2, n)
        };
        Ok(self.mask(target, a))
    }

    pub fn psuc(&self, from: usize, target: usize, steps: u64) -> Result<f64> {
        self.amplitude(from, target, steps).map(|a| a.probability())
    }

    /// Bessel approximation of [`ChainModel::amplitude`]; both labels get the
    /// same value before masking.
    pub fn bessel_amplitude(&self, from: usize, target: usize, steps: u64) -> Result<AmplitudePair> {
        self.check(from, target)?;
        let n = half_steps(steps)?;
        let x = 2.0 * n as f64 * self.ring.transmission().sqrt();
        if x > MAX_ARGUMENT {
            return Err(Error::OutOfRange(format!(
                "Bessel argument {x} too large for {steps} steps"
            )));
        }
        let l = 2 * self.stars;
        let (d1, d2) = self.offsets(from, target);
        // both ways around the ring of 2M
        let term = |d: usize| -> Result<f64> { Ok(bessel_or_tail(2 * d, x)? + bessel_or_tail(2 * (l - d), x)?) };
        let v = if from == 0 {
            term(d1)?
        } else {
            FRAC_1_SQRT_2 * (term(d1)? + term(d2)?)
        };
        Ok(self.mask(
            target,
            AmplitudePair {
                e_plus: v,
                e_minus: v,
            },
        ))
    }

    pub fn bessel_psuc(&self, from: usize, target: usize, steps: u64) -> Result<f64> {
        self.bessel_amplitude(from, target, steps).map(|a| a.probability())
    }
}

/// Exact amplitudes on a chain of `M` stars with `N` spokes at junction
/// `k + b` after `steps` steps, starting from connection `k` (`0` is START).
pub fn chain_amplitude(stars: usize, spokes: usize, k: usize, b: usize, steps: u64) -> Result<AmplitudePair> {
    ChainModel::new(stars, spokes)?.amplitude(k, k + b, steps)
}

pub fn chain_psuc(stars: usize, spokes: usize, k: usize, b: usize, steps: u64) -> Result<f64> {
    chain_amplitude(stars, spokes, k, b, steps).map(|a| a.probability())
}

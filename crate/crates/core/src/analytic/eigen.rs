//! Bloch eigenvectors of `U²` on a ring and a direct residual check.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::RingSpectrum;
use crate::error::{Error, Result};
use crate::maze::{Direction, MazeSpec, Topology};
use crate::walk::dense_unitary;

pub const MAX_CHECK_STARS: usize = 8;
pub const MAX_CHECK_SPOKES: usize = 24;

/// Which of the two non-trivial eigenvectors of a Bloch sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Eigenvalue `e^{+iω}`.
    Plus,
    /// Eigenvalue `e^{-iω}`.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    /// `max ‖U²Ψ - λΨ‖` over every sector and branch.
    pub max_residual: f64,
    pub max_norm_error: f64,
    /// Residual of the `m = 0` vector with eigenvalue 1.
    pub zero_mode_residual: f64,
}

fn lambda(spectrum: &RingSpectrum, m: usize, branch: Branch) -> Complex64 {
    let w = spectrum.omega(m);
    match branch {
        Branch::Plus => Complex64::from_polar(1.0, w),
        Branch::Minus => Complex64::from_polar(1.0, -w),
    }
}

fn c0(spectrum: &RingSpectrum, m: usize, branch: Branch, norm: f64) -> Complex64 {
    let l = lambda(spectrum, m, branch);
    let r = 1.0 - spectrum.transmission();
    let bloch = Complex64::from_polar(1.0, spectrum.phi(m));
    (Complex64::new(1.0, 0.0) - l) / (l - bloch) * r / norm
}

/// The eigenvector of sector `m` and its eigenvalue. Only outgoing edges are
/// populated. For `m = 0` both branches give the eigenvalue-1 vector with
/// `c₀ = -c₁ = 1/√(2M)`.
pub fn bloch_eigenvector(maze: &MazeSpec, m: usize, branch: Branch) -> Result<(Complex64, Vec<Complex64>)> {
    if maze.topology() != Topology::Ring {
        return Err(Error::Topology("Bloch eigenvectors live on a ring".into()));
    }
    let stars = maze.stars();
    if m >= stars {
        return Err(Error::OutOfRange(format!("sector {m} not below M = {stars}")));
    }
    let spectrum = RingSpectrum::new(stars, maze.spokes())?;
    let zero = Complex64::new(0.0, 0.0);
    let (eigenvalue, c_first, c_second, c_spoke) = if m == 0 {
        let a = 1.0 / ((2 * stars) as f64).sqrt();
        (Complex64::new(1.0, 0.0), Complex64::new(a, 0.0), Complex64::new(-a, 0.0), zero)
    } else {
        let t = spectrum.transmission();
        let norm = (2.0 * stars as f64 * t * (1.0 + spectrum.omega(m).cos())).sqrt();
        let other = match branch {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        };
        (
            lambda(&spectrum, m, branch),
            c0(&spectrum, m, branch, norm),
            c0(&spectrum, m, other, norm).conj(),
            Complex64::new(t / norm, 0.0),
        )
    };
    let mut v = vec![zero; maze.edge_count()];
    for j in 1..=stars {
        let phase = Complex64::from_polar(1.0, spectrum.phi(m) * j as f64);
        for slot in 0..maze.spokes() {
            let c = match slot {
                0 => c_first,
                1 => c_second,
                _ => c_spoke,
            };
            v[maze.slot_index(j - 1, Direction::Outward, slot)] = phase * c;
        }
    }
    Ok((eigenvalue, v))
}

fn square(u: &[f64], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim * dim];
    for col in 0..dim {
        for k in 0..dim {
            let b = u[col * dim + k];
            if b == 0.0 {
                continue;
            }
            let a = &u[k * dim..(k + 1) * dim];
            for (o, &x) in out[col * dim..(col + 1) * dim].iter_mut().zip(a) {
                *o += x * b;
            }
        }
    }
    out
}

fn residual(u2: &[f64], dim: usize, eigenvalue: Complex64, v: &[Complex64]) -> f64 {
    let mut image = vec![Complex64::new(0.0, 0.0); dim];
    for (col, &x) in v.iter().enumerate() {
        if x == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, &a) in image.iter_mut().zip(&u2[col * dim..(col + 1) * dim]) {
            *o += x * a;
        }
    }
    image
        .iter()
        .zip(v)
        .map(|(y, x)| (y - eigenvalue * x).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Builds every non-trivial eigenvector of a small ring, applies the dense
/// `U²` and reports the worst eigen-residual and normalization error.
pub fn ring_eigenvector_check(maze: &MazeSpec) -> Result<EigenReport> {
    if maze.topology() != Topology::Ring {
        return Err(Error::Topology("eigenvector check needs a ring".into()));
    }
    if maze.stars() > MAX_CHECK_STARS || maze.spokes() > MAX_CHECK_SPOKES {
        return Err(Error::Sizing(format!(
            "eigenvector check limited to M <= {MAX_CHECK_STARS}, N <= {MAX_CHECK_SPOKES}"
        )));
    }
    let dim = maze.edge_count();
    let u2 = square(&dense_unitary(maze), dim);
    let mut report = EigenReport {
        max_residual: 0.0,
        max_norm_error: 0.0,
        zero_mode_residual: 0.0,
    };
    for m in 0..maze.stars() {
        for branch in [Branch::Plus, Branch::Minus] {
            let (lambda, v) = bloch_eigenvector(maze, m, branch)?;
            let res = residual(&u2, dim, lambda, &v);
            let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            report.max_residual = report.max_residual.max(res);
            report.max_norm_error = report.max_norm_error.max((norm - 1.0).abs());
            if m == 0 {
                report.zero_mode_residual = report.zero_mode_residual.max(res);
            }
        }
    }
    Ok(report)
}

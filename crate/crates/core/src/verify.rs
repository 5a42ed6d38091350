//! Property suites that cross-check the simulator against the closed forms.
//!
//! Each suite runs at fixed, documented sizes and reports the worst residual
//! it saw together with the tolerance it was held to.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    bessel_j, epsilon_grid, integer_step_error_bound, localized_delta, ring_eigenvector_check,
    superposed_delta, superposed_optimum, BoundCase, ChainModel, ReducedGroverModel, RingSpectrum,
};
use crate::error::{Error, Result};
use crate::maze::{build_maze, MazeSpec, Topology};
use crate::walk::{
    apply_step, connection_amplitudes, dense_unitary, path_probability, prepare, MirrorRing,
    Propagator, StatePrescription, WalkState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Unitarity,
    Subspace,
    RingExact,
    Mirror,
    Bounds,
    Bessel,
    Eigenvectors,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Self::Unitarity,
        Self::Subspace,
        Self::RingExact,
        Self::Mirror,
        Self::Bounds,
        Self::Bessel,
        Self::Eigenvectors,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Unitarity => "unitarity",
            Self::Subspace => "subspace",
            Self::RingExact => "ring-exact",
            Self::Mirror => "mirror",
            Self::Bounds => "bounds",
            Self::Bessel => "bessel",
            Self::Eigenvectors => "eigenvectors",
        }
    }

    /// Suites named by a command-line selector; `all` expands to every suite.
    pub fn parse_selector(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            Ok(Self::ALL.to_vec())
        } else {
            s.parse().map(|x| vec![x])
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundComparison {
    pub label: String,
    pub measured: f64,
    pub bound: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub cases: u64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub bound_comparisons: Vec<BoundComparison>,
    pub pass: bool,
}

/// Collects residuals against one tolerance.
struct Tally {
    cases: u64,
    worst: f64,
}

impl Tally {
    fn new() -> Self {
        Self { cases: 0, worst: 0.0 }
    }

    fn add(&mut self, residual: f64) {
        self.cases += 1;
        // NaN must fail the suite
        if residual.is_nan() || residual > self.worst {
            self.worst = if residual.is_nan() { f64::INFINITY } else { residual };
        }
    }

    fn merge(&mut self, other: Tally) {
        self.cases += other.cases;
        self.worst = self.worst.max(other.worst);
    }

    fn report(self, suite: Suite, tolerance: f64, bounds: Vec<BoundComparison>) -> VerifyReport {
        let pass = self.worst <= tolerance && bounds.iter().all(|b| b.within);
        VerifyReport {
            suite,
            cases: self.cases,
            max_residual: self.worst,
            tolerance,
            bound_comparisons: bounds,
            pass,
        }
    }
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn chain(m: usize, n: usize) -> Result<MazeSpec> {
    build_maze(Topology::Chain, m, n, 11)
}

fn ring(m: usize, n: usize) -> Result<MazeSpec> {
    build_maze(Topology::Ring, m, n, 11)
}

/// Largest `|UᵀU - I|` entry of the materialized step operator.
pub fn orthonormality_residual(maze: &MazeSpec) -> f64 {
    let dim = maze.edge_count();
    let u = dense_unitary(maze);
    (0..dim)
        .into_par_iter()
        .map(|i| {
            let ci = &u[i * dim..(i + 1) * dim];
            (0..dim)
                .map(|j| {
                    let cj = &u[j * dim..(j + 1) * dim];
                    let d: f64 = ci.iter().zip(cj).map(|(a, b)| a * b).sum();
                    (d - if i == j { 1.0 } else { 0.0 }).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

pub const UNITARITY_SIZES: [(Topology, usize, usize); 5] = [
    (Topology::Chain, 2, 4),
    (Topology::Chain, 3, 8),
    (Topology::Chain, 5, 16),
    (Topology::Ring, 4, 12),
    (Topology::Ring, 10, 20),
];

fn unitarity() -> Result<VerifyReport> {
    let mut t = Tally::new();
    for (topology, m, n) in UNITARITY_SIZES {
        t.add(orthonormality_residual(&build_maze(topology, m, n, 11)?));
    }
    Ok(t.report(Suite::Unitarity, 1e-12, Vec::new()))
}

/// Worst residual of the four one-step relations of the ψ₁..ψ₄ subspace.
pub fn subspace_residual(maze: &MazeSpec) -> Result<f64> {
    let r = maze.reflection();
    let t = maze.transmission();
    let c = 2.0 * (r * t).sqrt();
    let psi = |p| prepare(maze, p);
    let (p1, p2, p3, p4) = (
        psi(StatePrescription::Psi1)?,
        psi(StatePrescription::Psi2)?,
        psi(StatePrescription::Psi3)?,
        psi(StatePrescription::Psi4)?,
    );
    let combo = |a: f64, x: &WalkState, b: f64, y: &WalkState| -> Vec<f64> {
        x.amplitudes().iter().zip(y.amplitudes()).map(|(u, v)| a * u + b * v).collect()
    };
    let checks = [
        (apply_step(maze, &p1), p2.amplitudes().to_vec()),
        (apply_step(maze, &p2), combo(r - t, &p1, c, &p3)),
        (apply_step(maze, &p3), p4.amplitudes().iter().map(|x| -x).collect()),
        (apply_step(maze, &p4), combo(t - r, &p3, c, &p1)),
    ];
    Ok(checks
        .iter()
        .map(|(got, want)| max_diff(got.amplitudes(), want))
        .fold(0.0, f64::max))
}

/// Worst gap between simulated path probability from the superposed start
/// and `sin²((2n+1)θ/2)` over even steps up to `4n₀`.
pub fn grover_law_residual(m: usize, n: usize) -> Result<f64> {
    let maze = chain(m, n)?;
    let model = ReducedGroverModel::new(n)?;
    let mut s = prepare(&maze, StatePrescription::SuperposedInit)?;
    let mut prop = Propagator::new(&maze);
    let mut worst: f64 = 0.0;
    let last = (4.0 * model.n0()).floor() as u64;
    for half in 0..=last {
        let p = path_probability(&maze, &s);
        worst = worst.max((p - model.psuc_continuous(half as f64, true)).abs());
        prop.advance(&mut s, 2);
    }
    Ok(worst)
}

fn subspace() -> Result<VerifyReport> {
    let mut t = Tally::new();
    for (m, n) in [(2, 4), (3, 8), (5, 16), (4, 100)] {
        t.add(subspace_residual(&chain(m, n)?)?);
    }
    for (m, n) in [(4, 10), (6, 7)] {
        t.add(subspace_residual(&ring(m, n)?)?);
    }
    let mut grover = Tally::new();
    grover.add(grover_law_residual(5, 100)?);
    t.merge(grover);
    Ok(t.report(Suite::Subspace, 1e-10, Vec::new()))
}

/// Worst gap between simulated ring amplitudes and the exact Bloch sums, for
/// every offset and every even step up to `max_steps`.
pub fn ring_exact_residual(m: usize, n: usize, start: usize, max_steps: u64) -> Result<f64> {
    let maze = ring(m, n)?;
    let spectrum = RingSpectrum::new(m, n)?;
    let mut s = prepare(&maze, StatePrescription::LocalizedConnection(start))?;
    let mut prop = Propagator::new(&maze);
    let mut worst: f64 = 0.0;
    for steps in (0..=max_steps).step_by(2) {
        for b in 0..m {
            let target = (start - 1 + b) % m + 1;
            let sim = connection_amplitudes(&maze, &s, target)?;
            let exact = spectrum.ring_amplitude_exact(b, steps)?;
            worst = worst
                .max((sim.e_plus - exact.e_plus).abs())
                .max((sim.e_minus - exact.e_minus).abs());
        }
        prop.advance(&mut s, 2);
    }
    Ok(worst)
}

fn ring_exact() -> Result<VerifyReport> {
    let cases = [(5usize, 20usize, 2usize), (8, 32, 8), (11, 450, 4)];
    let mut t = Tally::new();
    for r in cases
        .par_iter()
        .map(|&(m, n, k)| ring_exact_residual(m, n, k, 100))
        .collect::<Result<Vec<_>>>()?
    {
        t.add(r);
    }
    Ok(t.report(Suite::RingExact, 1e-9, Vec::new()))
}

/// For a chain started at connection `from` (0 is START): the worst gap
/// between the chain simulation and the normal side of the mirrored ring
/// evolution, and the worst gap between the chain simulation and the closed
/// form, over even steps up to `max_steps`.
pub fn mirror_residuals(m: usize, n: usize, from: usize, max_steps: u64) -> Result<(f64, f64)> {
    let maze = chain(m, n)?;
    let mirror = MirrorRing::new(&maze)?;
    let model = ChainModel::new(m, n)?;
    let p = if from == 0 {
        StatePrescription::LocalizedStart
    } else {
        StatePrescription::LocalizedConnection(from)
    };
    let mut s = prepare(&maze, p)?;
    let mut r = mirror.embed(&s);
    let mut chain_prop = Propagator::new(&maze);
    let mut ring_prop = Propagator::new(mirror.ring());
    let (mut state_gap, mut formula_gap): (f64, f64) = (0.0, 0.0);
    for steps in (0..=max_steps).step_by(2) {
        state_gap = state_gap
            .max(max_diff(mirror.normal_side(&r).amplitudes(), s.amplitudes()))
            .max(mirror.antisymmetry_defect(&r));
        for target in 0..=m {
            let sim = connection_amplitudes(&maze, &s, target)?;
            let f = model.amplitude(from, target, steps)?;
            formula_gap = formula_gap
                .max((sim.e_plus - f.e_plus).abs())
                .max((sim.e_minus - f.e_minus).abs());
        }
        chain_prop.advance(&mut s, 2);
        ring_prop.advance(&mut r, 2);
    }
    Ok((state_gap, formula_gap))
}

fn mirror() -> Result<VerifyReport> {
    let cases = [(4usize, 16usize, 0usize), (4, 16, 2), (11, 450, 0), (11, 450, 1), (11, 450, 5)];
    let results = cases
        .par_iter()
        .map(|&(m, n, k)| mirror_residuals(m, n, k, 100))
        .collect::<Result<Vec<_>>>()?;
    let mut t = Tally::new();
    for (a, b) in results {
        t.add(a);
        t.add(b);
    }
    Ok(t.report(Suite::Mirror, 1e-10, Vec::new()))
}

pub const BOUND_SPOKES: [usize; 4] = [16, 64, 256, 1024];

/// Largest `Δ_ε` for each bound case at `N` spokes, paired with its bound.
pub fn bound_scan(n: usize) -> Result<Vec<BoundComparison>> {
    let model = ReducedGroverModel::new(n)?;
    let mut general: f64 = 0.0;
    for half in 0..=(4.0 * model.n0()).ceil() as u64 {
        for eps in epsilon_grid() {
            general = general.max(superposed_delta(&model, half as f64, eps));
        }
    }
    let star = superposed_optimum(&model);
    let optimal = epsilon_grid()
        .map(|eps| superposed_delta(&model, star, eps))
        .fold(0.0, f64::max);
    let mut localized: f64 = 0.0;
    let stars = 11;
    let spectrum = RingSpectrum::new(stars, n)?;
    let span = (2.0 * std::f64::consts::PI * (n as f64 / 2.0).sqrt()).ceil() as u64;
    for b in 0..stars {
        for half in 0..=span {
            for eps in epsilon_grid() {
                localized = localized.max(localized_delta(&spectrum, b, half as f64, eps));
            }
        }
    }
    [
        (BoundCase::Superposed, general),
        (BoundCase::SuperposedOptimal, optimal),
        (BoundCase::Localized, localized),
    ]
    .into_iter()
    .map(|(case, measured)| {
        let bound = integer_step_error_bound(case, n)?;
        Ok(BoundComparison {
            label: format!("{case} N={n}"),
            measured,
            bound,
            within: measured <= bound,
        })
    })
    .collect()
}

fn bounds() -> Result<VerifyReport> {
    let mut comparisons = Vec::new();
    for n in BOUND_SPOKES {
        comparisons.extend(bound_scan(n)?);
    }
    let mut t = Tally::new();
    for c in &comparisons {
        t.add((c.measured - c.bound).max(0.0));
    }
    Ok(t.report(Suite::Bounds, 0.0, comparisons))
}

/// `(1/π) ∫₀^π cos(nτ - z sin τ) dτ` by composite Simpson with `panels` panels.
pub fn bessel_quadrature(order: u32, z: f64, panels: usize) -> f64 {
    let panels = panels + panels % 2;
    let h = std::f64::consts::PI / panels as f64;
    let f = |x: f64| (f64::from(order) * x - z * x.sin()).cos();
    let mut acc = f(0.0) + f(std::f64::consts::PI);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(i as f64 * h);
    }
    acc * h / 3.0 / std::f64::consts::PI
}

fn bessel() -> Result<VerifyReport> {
    let mut t = Tally::new();
    for order in (0..=64).step_by(4) {
        for zi in 0..=40 {
            let z = f64::from(zi) * 5.0;
            t.add((bessel_j(order, z)? - bessel_quadrature(order, z, 4096)).abs());
        }
    }
    // J₀² + 2 Σ Jₖ² = 1
    for z in [0.5, 3.0, 17.0, 90.0, 250.0] {
        let mut s = bessel_j(0, z)?.powi(2);
        for k in 1..=512 {
            s += 2.0 * bessel_j(k, z)?.powi(2);
        }
        t.add((s - 1.0).abs());
    }
    Ok(t.report(Suite::Bessel, 1e-8, Vec::new()))
}

fn eigenvectors() -> Result<VerifyReport> {
    let mut t = Tally::new();
    for (m, n) in [(2usize, 3usize), (3, 5), (4, 8), (5, 16), (8, 24)] {
        let r = ring_eigenvector_check(&ring(m, n)?)?;
        t.add(r.max_residual);
        t.add(r.max_norm_error);
        t.add(r.zero_mode_residual);
    }
    Ok(t.report(Suite::Eigenvectors, 1e-9, Vec::new()))
}

pub fn run_suite(suite: Suite) -> Result<VerifyReport> {
    match suite {
        Suite::Unitarity => unitarity(),
        Suite::Subspace => subspace(),
        Suite::RingExact => ring_exact(),
        Suite::Mirror => mirror(),
        Suite::Bounds => bounds(),
        Suite::Bessel => bessel(),
        Suite::Eigenvectors => eigenvectors(),
    }
}

//! Exact state-vector simulation of the scattering walk.
//!
//! Amplitudes are stored as `f64`: every scattering coefficient (`-1`, `-r`,
//! `t`, `±1`) and every prepared initial state is real, so the evolution never
//! leaves the reals.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::AmplitudePair;
use crate::error::{Error, Result};
use crate::maze::{build_maze, DirectedEdge, Direction, MazeSpec, Topology, Vertex};

/// States at or above this size are scattered star-parallel.
const PARALLEL_THRESHOLD: usize = 1 << 18;

#[derive(Debug, Clone, PartialEq)]
pub struct WalkState {
    amplitudes: Vec<f64>,
    step_count: u64,
}

impl WalkState {
    /// Wraps raw amplitudes. The caller is responsible for normalization.
    pub fn from_amplitudes(amplitudes: Vec<f64>) -> Self {
        Self {
            amplitudes,
            step_count: 0,
        }
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> f64 {
        self.amplitudes[index]
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &WalkState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a * b)
            .sum()
    }
}

/// Named initial states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatePrescription {
    /// Alternating-sign superposition of outgoing spoke states.
    Psi1,
    /// Alternating-sign superposition of incoming spoke states.
    Psi2,
    /// Alternating-sign superposition of outgoing junction states.
    Psi3,
    /// Alternating-sign superposition of incoming junction states.
    Psi4,
    /// Every outgoing edge with amplitude `(-1)^j / sqrt(MN)`.
    SuperposedInit,
    /// `|A_1, START⟩` (chain only).
    LocalizedStart,
    /// `(|A_{k+1}, B_{k1}⟩ - |A_k, B_{k1}⟩) / sqrt 2`.
    LocalizedConnection(usize),
    /// All outgoing edges of star `j` with sign `-1` and of star `j+1` with
    /// sign `+1`, normalized by `sqrt(2N)`.
    TwoStar(usize),
    BasisEdge(DirectedEdge),
}

fn sign(star: usize) -> f64 {
    if star.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn next_star(maze: &MazeSpec, star: usize) -> usize {
    star % maze.stars() + 1
}

/// Builds the state named by `p`.
pub fn prepare(maze: &MazeSpec, p: StatePrescription) -> Result<WalkState> {
    let m = maze.stars();
    let n = maze.spokes();
    let chain = maze.topology() == Topology::Chain;
    let mut amps = vec![0.0; maze.edge_count()];
    let out = |star: usize, slot: usize| maze.slot_index(star - 1, Direction::Outward, slot);
    let inward = |star: usize, slot: usize| maze.slot_index(star - 1, Direction::Inward, slot);
    match p {
        StatePrescription::Psi1 | StatePrescription::Psi2 => {
            let norm = 1.0 / ((m * (n - 2)) as f64).sqrt();
            for j in 1..=m {
                for k in 2..n {
                    let i = if p == StatePrescription::Psi1 { out(j, k) } else { inward(j, k) };
                    amps[i] = sign(j) * norm;
                }
            }
        }
        StatePrescription::Psi3 | StatePrescription::Psi4 => {
            let norm = 1.0 / ((2 * m) as f64).sqrt();
            for j in 1..=m {
                for slot in 0..2 {
                    let i = if p == StatePrescription::Psi3 { out(j, slot) } else { inward(j, slot) };
                    amps[i] = sign(j) * norm;
                }
            }
        }
        StatePrescription::SuperposedInit => {
            let norm = 1.0 / ((m * n) as f64).sqrt();
            for j in 1..=m {
                for slot in 0..n {
                    amps[out(j, slot)] = sign(j) * norm;
                }
            }
        }
        StatePrescription::LocalizedStart => {
            if !chain {
                return Err(Error::Topology("a ring has no START vertex".into()));
            }
            amps[out(1, 0)] = 1.0;
        }
        StatePrescription::LocalizedConnection(k) => {
            let max = if chain { m - 1 } else { m };
            if !(1..=max).contains(&k) {
                return Err(Error::OutOfRange(format!("connection {k} not in 1..={max}")));
            }
            let h = std::f64::consts::FRAC_1_SQRT_2;
            amps[out(next_star(maze, k), 0)] += h;
            amps[out(k, 1)] -= h;
        }
        StatePrescription::TwoStar(j) => {
            let max = if chain { m - 1 } else { m };
            if !(1..=max).contains(&j) {
                return Err(Error::OutOfRange(format!("star pair {j} not in 1..={max}")));
            }
            let norm = 1.0 / ((2 * n) as f64).sqrt();
            for slot in 0..n {
                amps[out(j, slot)] = -norm;
                amps[out(next_star(maze, j), slot)] = norm;
            }
        }
        StatePrescription::BasisEdge(e) => {
            amps[maze.edge_index(e)?] = 1.0;
        }
    }
    Ok(WalkState::from_amplitudes(amps))
}

fn scatter_star(
    s: usize,
    src: &[f64],
    dst_block: &mut [f64],
    n: usize,
    m: usize,
    t: f64,
    ring: bool,
) {
    let block = 2 * n;
    let (src_out, src_in) = src[s * block..(s + 1) * block].split_at(n);
    let (dst_out, dst_in) = dst_block.split_at_mut(n);
    // center: out_l = t * (sum of incoming) - in_l
    let ts = t * src_in.iter().sum::<f64>();
    for (o, &i) in dst_out.iter_mut().zip(src_in) {
        *o = ts - i;
    }
    // spokes reflect
    dst_in[2..].copy_from_slice(&src_out[2..]);
    // junctions transmit; chain terminals reflect with a phase flip
    dst_in[1] = if s + 1 < m {
        src[(s + 1) * block]
    } else if ring {
        src[0]
    } else {
        -src_out[1]
    };
    dst_in[0] = if s > 0 {
        src[(s - 1) * block + 1]
    } else if ring {
        src[(m - 1) * block + 1]
    } else {
        -src_out[0]
    };
}

/// One application of `U`, reading `src` and overwriting `dst`.
pub fn scatter_into(maze: &MazeSpec, src: &[f64], dst: &mut [f64]) {
    let n = maze.spokes();
    let m = maze.stars();
    let t = maze.transmission();
    let ring = maze.topology() == Topology::Ring;
    assert_eq!(src.len(), maze.edge_count());
    assert_eq!(dst.len(), maze.edge_count());
    if src.len() >= PARALLEL_THRESHOLD {
        dst.par_chunks_exact_mut(2 * n)
            .enumerate()
            .for_each(|(s, blk)| scatter_star(s, src, blk, n, m, t, ring));
    } else {
        for (s, blk) in dst.chunks_exact_mut(2 * n).enumerate() {
            scatter_star(s, src, blk, n, m, t, ring);
        }
    }
}

pub fn apply_step(maze: &MazeSpec, s: &WalkState) -> WalkState {
    let mut next = vec![0.0; s.len()];
    scatter_into(maze, &s.amplitudes, &mut next);
    WalkState {
        amplitudes: next,
        step_count: s.step_count + 1,
    }
}

/// Applies `U^steps` using two buffers.
pub fn evolve(maze: &MazeSpec, s: &WalkState, steps: u64) -> WalkState {
    let mut state = s.clone();
    Propagator::new(maze).advance(&mut state, steps);
    state
}

/// Reusable scratch space for repeated evolution of states on one maze.
pub struct Propagator<'a> {
    maze: &'a MazeSpec,
    scratch: Vec<f64>,
}

impl<'a> Propagator<'a> {
    pub fn new(maze: &'a MazeSpec) -> Self {
        Self {
            maze,
            scratch: vec![0.0; maze.edge_count()],
        }
    }

    pub fn advance(&mut self, state: &mut WalkState, steps: u64) {
        for _ in 0..steps {
            scatter_into(self.maze, &state.amplitudes, &mut self.scratch);
            std::mem::swap(&mut state.amplitudes, &mut self.scratch);
        }
        state.step_count += steps;
    }
}

/// Rounds a real step count to the nearest even integer, ties up.
pub fn even_steps(x: f64) -> u64 {
    assert!(x.is_finite() && x >= 0.0, "step count must be finite and non-negative");
    2 * (x / 2.0 + 0.5).floor() as u64
}

fn check_junction(maze: &MazeSpec, target: usize) -> Result<()> {
    if maze.is_valid_vertex(Vertex::Junction(target)) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("junction {target} does not exist")))
    }
}

/// Signed amplitudes on the two success states of junction `target`.
///
/// `e_plus` is `-⟨A_target, B_target⟩` (the edge on the near star) and
/// `e_minus` is `⟨A_{target+1}, B_target⟩` (the edge on the far star). At
/// START only the far edge exists and at END only the near edge; the missing
/// one reads as zero.
pub fn connection_amplitudes(maze: &MazeSpec, s: &WalkState, target: usize) -> Result<AmplitudePair> {
    check_junction(maze, target)?;
    let m = maze.stars();
    let near = (target >= 1).then(|| -s.amplitudes[maze.slot_index(target - 1, Direction::Outward, 1)]);
    let far_star = match maze.topology() {
        Topology::Chain => (target < m).then_some(target + 1),
        Topology::Ring => Some(target % m + 1),
    };
    let far = far_star.map(|j| s.amplitudes[maze.slot_index(j - 1, Direction::Outward, 0)]);
    Ok(AmplitudePair {
        e_plus: near.unwrap_or(0.0),
        e_minus: far.unwrap_or(0.0),
    })
}

/// Probability of finding the walker on the success states of `target`;
/// a single edge for START and END.
pub fn connection_probability(maze: &MazeSpec, s: &WalkState, target: usize) -> Result<f64> {
    connection_amplitudes(maze, s, target).map(|a| a.probability())
}

/// Indices of every directed state on the edges incident to junction `target`.
pub fn junction_edge_indices(maze: &MazeSpec, target: usize) -> Result<Vec<usize>> {
    check_junction(maze, target)?;
    let mut idx = Vec::with_capacity(4);
    for star in maze.adjacent(Vertex::Junction(target))? {
        for e in [
            DirectedEdge::new(star, Vertex::Junction(target)),
            DirectedEdge::new(Vertex::Junction(target), star),
        ] {
            idx.push(maze.edge_index(e)?);
        }
    }
    Ok(idx)
}

/// Total probability on every directed state of the path (all junctions).
pub fn path_probability(maze: &MazeSpec, s: &WalkState) -> f64 {
    let first = if maze.topology() == Topology::Chain { 0 } else { 1 };
    (first..=maze.stars())
        .flat_map(|k| junction_edge_indices(maze, k).expect("junction in range"))
        .map(|i| s.amplitudes[i].powi(2))
        .sum()
}

/// One observed edge, reported through the external labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementOutcome {
    pub star: usize,
    pub tail: String,
    pub head: String,
    pub direction: Direction,
}

impl MeasurementOutcome {
    /// Name of the endpoint that is not a star center.
    pub fn external_vertex(&self) -> &str {
        match self.direction {
            Direction::Outward => &self.head,
            Direction::Inward => &self.tail,
        }
    }
}

/// Samples an edge index with probability `amplitude²`.
pub fn sample_edge<R: Rng + ?Sized>(s: &WalkState, rng: &mut R) -> usize {
    let total: f64 = s.amplitudes.iter().map(|a| a * a).sum();
    let mut u = rng.random::<f64>() * total;
    let mut last_occupied = 0;
    for (i, a) in s.amplitudes.iter().enumerate() {
        let p = a * a;
        if p > 0.0 {
            if u < p {
                return i;
            }
            u -= p;
            last_occupied = i;
        }
    }
    last_occupied
}

/// Measures in the edge basis without collapsing `s`.
pub fn measure<R: Rng + ?Sized>(maze: &MazeSpec, s: &WalkState, rng: &mut R) -> MeasurementOutcome {
    outcome_for(maze, sample_edge(s, rng))
}

pub(crate) fn outcome_for(maze: &MazeSpec, index: usize) -> MeasurementOutcome {
    let (star0, direction, _) = maze.decompose(index).expect("sampled index in range");
    let e = maze.index_edge(index).expect("sampled index in range");
    MeasurementOutcome {
        star: star0 + 1,
        tail: maze.vertex_name(e.tail).expect("valid vertex"),
        head: maze.vertex_name(e.head).expect("valid vertex"),
        direction,
    }
}

/// Dense `U` in column-major order (`u[col * dim + row]`), built by applying
/// one step to every basis state. Meant for small verification instances.
pub fn dense_unitary(maze: &MazeSpec) -> Vec<f64> {
    let dim = maze.edge_count();
    let mut u = vec![0.0; dim * dim];
    let mut basis = vec![0.0; dim];
    for (col, column) in u.chunks_exact_mut(dim).enumerate() {
        basis[col] = 1.0;
        scatter_into(maze, &basis, column);
        basis[col] = 0.0;
    }
    u
}

/// The ring of `2M` stars whose antisymmetric ("mirroring") states evolve
/// exactly like states on a chain of `M` stars.
///
/// Chain star `j` sits at ring position `j`; its mirror copy sits at ring
/// position `2M + 1 - j` with the roles of its two junction slots swapped.
#[derive(Debug, Clone)]
pub struct MirrorRing {
    chain: MazeSpec,
    ring: MazeSpec,
}

impl MirrorRing {
    pub fn new(chain: &MazeSpec) -> Result<Self> {
        if chain.topology() != Topology::Chain {
            return Err(Error::Topology("mirror construction needs a chain".into()));
        }
        let ring = build_maze(Topology::Ring, 2 * chain.stars(), chain.spokes(), chain.seed())?;
        Ok(Self {
            chain: chain.clone(),
            ring,
        })
    }

    pub fn ring(&self) -> &MazeSpec {
        &self.ring
    }

    fn pair(&self, chain_index: usize) -> (usize, usize) {
        let (star0, direction, slot) = self.chain.decompose(chain_index).expect("index in range");
        let mirror_star0 = 2 * self.chain.stars() - 1 - star0;
        let mirror_slot = match slot {
            0 => 1,
            1 => 0,
            k => k,
        };
        (
            self.ring.slot_index(star0, direction, slot),
            self.ring.slot_index(mirror_star0, direction, mirror_slot),
        )
    }

    /// `(normal - mirror) / sqrt 2`, a unit-norm state on the ring.
    pub fn embed(&self, chain_state: &WalkState) -> WalkState {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![0.0; self.ring.edge_count()];
        for (i, &a) in chain_state.amplitudes.iter().enumerate() {
            let (normal, mirror) = self.pair(i);
            amps[normal] = a * h;
            amps[mirror] = -a * h;
        }
        WalkState {
            amplitudes: amps,
            step_count: chain_state.step_count,
        }
    }

    /// Reads a chain state back off the normal half of a ring state produced
    /// by [`MirrorRing::embed`].
    pub fn normal_side(&self, ring_state: &WalkState) -> WalkState {
        let s2 = std::f64::consts::SQRT_2;
        let amps = (0..self.chain.edge_count())
            .map(|i| ring_state.amplitudes[self.pair(i).0] * s2)
            .collect();
        WalkState {
            amplitudes: amps,
            step_count: ring_state.step_count,
        }
    }

    /// Largest `|normal + mirror|` over all pairs: zero for states that stay
    /// in the mirroring subspace.
    pub fn antisymmetry_defect(&self, ring_state: &WalkState) -> f64 {
        (0..self.chain.edge_count())
            .map(|i| {
                let (a, b) = self.pair(i);
                (ring_state.amplitudes[a] + ring_state.amplitudes[b]).abs()
            })
            .fold(0.0, f64::max)
    }
}

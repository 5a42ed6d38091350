//! Chains and rings of star graphs, their directed-edge basis, and the
//! neighbor oracle.
//!
//! Star `j` (1-based) has center `A_j` and `N` incident edges. Internally
//! every star lays its edges out in `N` *slots*:
//!
//! * slot 0: the junction shared with the previous star (`B_{(j-1)1}`), which
//!   is START for star 1 of a chain;
//! * slot 1: the junction shared with the next star (`B_{j1}`), which is END
//!   for star `M` of a chain;
//! * slots 2..N: dead-end spokes `B_{jk}`.
//!
//! The directed edge in slot `l` of star `s` (0-based) pointing away from the
//! center ("outward", `|A_j, B⟩`) has canonical index `s·2N + l`; the inward
//! edge (`|B, A_j⟩`) has index `s·2N + N + l`.
//!
//! Hiding is a per-star permutation of the internal spoke indices `1..N` onto
//! opaque external labels. External names are `"S"`, `"A{j}"` and
//! `"B{j}:{label}"`; END appears under its spoke name and is only flagged when
//! queried directly (the alias `"E"` is accepted for lookups).

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Version written into serialized maze documents.
pub const MAZE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Chain,
    Ring,
}

impl Topology {
    fn min_stars(self) -> usize {
        match self {
            Topology::Chain => 1,
            Topology::Ring => 2,
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Chain => "chain",
            Topology::Ring => "ring",
        })
    }
}

impl FromStr for Topology {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(Topology::Chain),
            "ring" => Ok(Topology::Ring),
            other => Err(Error::Document(format!("unknown topology `{other}`"))),
        }
    }
}

/// A vertex in internal (unhidden) coordinates. Star indices are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Center(usize),
    /// Dead-end spoke `B_{jk}`, `2 <= spoke <= N-1`.
    Spoke { star: usize, spoke: usize },
    /// `Junction(k)` is `B_{k1}`: START (k = 0) and END (k = M) on a chain,
    /// otherwise the connection between stars `k` and `k+1` (wrapping on a
    /// ring).
    Junction(usize),
}

/// A directed edge state `|tail, head⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DirectedEdge {
    pub tail: Vertex,
    pub head: Vertex,
}

impl DirectedEdge {
    pub fn new(tail: Vertex, head: Vertex) -> Self {
        Self { tail, head }
    }

    pub fn reversed(self) -> Self {
        Self {
            tail: self.head,
            head: self.tail,
        }
    }
}

/// Whether the particle moves away from (`Outward`) or towards (`Inward`) the
/// star center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Outward,
    Inward,
}

/// Answer of the neighbor oracle for one queried vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborAnswer {
    pub neighbors: Vec<String>,
    pub is_start: bool,
    pub is_end: bool,
}

impl NeighborAnswer {
    pub fn degree(&self) -> usize {
        self.neighbors.len()
    }
}

#[derive(Serialize, Deserialize)]
struct MazeDocument {
    version: u32,
    topology: Topology,
    #[serde(rename = "M")]
    stars: usize,
    #[serde(rename = "N")]
    spokes: usize,
    seed: u64,
    label_maps: Vec<Vec<u32>>,
}

/// An immutable maze instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MazeDocument", into = "MazeDocument")]
pub struct MazeSpec {
    topology: Topology,
    stars: usize,
    spokes: usize,
    seed: u64,
    // label_maps[j-1][k-1] is the external label of internal spoke k of star j.
    label_maps: Vec<Vec<u32>>,
    // inverse[j-1][label] is the internal spoke index; entry 0 is unused.
    inverse: Vec<Vec<u32>>,
}

impl From<MazeSpec> for MazeDocument {
    fn from(m: MazeSpec) -> Self {
        MazeDocument {
            version: MAZE_FORMAT_VERSION,
            topology: m.topology,
            stars: m.stars,
            spokes: m.spokes,
            seed: m.seed,
            label_maps: m.label_maps,
        }
    }
}

impl TryFrom<MazeDocument> for MazeSpec {
    type Error = Error;

    fn try_from(doc: MazeDocument) -> Result<Self> {
        if doc.version != MAZE_FORMAT_VERSION {
            return Err(Error::Document(format!(
                "unsupported version {} (expected {MAZE_FORMAT_VERSION})",
                doc.version
            )));
        }
        check_size(doc.topology, doc.stars, doc.spokes)?;
        MazeSpec::from_parts(doc.topology, doc.stars, doc.spokes, doc.seed, doc.label_maps)
    }
}

fn check_size(topology: Topology, stars: usize, spokes: usize) -> Result<()> {
    if spokes < 3 {
        return Err(Error::Sizing(format!("need N >= 3 spokes, got {spokes}")));
    }
    if stars < topology.min_stars() {
        return Err(Error::Sizing(format!(
            "a {topology} needs at least {} stars, got {stars}",
            topology.min_stars()
        )));
    }
    if spokes > u32::MAX as usize || stars.checked_mul(spokes).and_then(|x| x.checked_mul(2)).is_none() {
        return Err(Error::Sizing(format!("{stars} x {spokes} is too large")));
    }
    Ok(())
}

/// Builds a maze whose hidden labels are a deterministic function of
/// `(topology, stars, spokes, seed)`.
pub fn build_maze(topology: Topology, stars: usize, spokes: usize, seed: u64) -> Result<MazeSpec> {
    check_size(topology, stars, spokes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let label_maps = (0..stars)
        .map(|_| {
            let mut labels: Vec<u32> = (1..spokes as u32).collect();
            labels.shuffle(&mut rng);
            labels
        })
        .collect();
    MazeSpec::from_parts(topology, stars, spokes, seed, label_maps)
}

impl MazeSpec {
    fn from_parts(
        topology: Topology,
        stars: usize,
        spokes: usize,
        seed: u64,
        label_maps: Vec<Vec<u32>>,
    ) -> Result<Self> {
        if label_maps.len() != stars {
            return Err(Error::Document(format!(
                "expected {stars} label maps, found {}",
                label_maps.len()
            )));
        }
        let mut inverse = Vec::with_capacity(stars);
        for (j, map) in label_maps.iter().enumerate() {
            if map.len() != spokes - 1 {
                return Err(Error::Document(format!(
                    "label map of star {} has {} entries, expected {}",
                    j + 1,
                    map.len(),
                    spokes - 1
                )));
            }
            let mut inv = vec![0u32; spokes];
            for (k, &label) in map.iter().enumerate() {
                let slot = inv.get_mut(label as usize).filter(|_| label != 0).ok_or_else(|| {
                    Error::Document(format!("label {label} of star {} out of range", j + 1))
                })?;
                if *slot != 0 {
                    return Err(Error::Document(format!(
                        "label {label} repeated in star {}",
                        j + 1
                    )));
                }
                *slot = k as u32 + 1;
            }
            inverse.push(inv);
        }
        Ok(Self {
            topology,
            stars,
            spokes,
            seed,
            label_maps,
            inverse,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("maze documents always serialize")
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Number of stars, `M`.
    pub fn stars(&self) -> usize {
        self.stars
    }

    /// Spokes per star, `N`.
    pub fn spokes(&self) -> usize {
        self.spokes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label_maps(&self) -> &[Vec<u32>] {
        &self.label_maps
    }

    /// Transmission amplitude `t = 2/N` of a star center.
    pub fn transmission(&self) -> f64 {
        2.0 / self.spokes as f64
    }

    /// Reflection magnitude `r = 1 - t`.
    pub fn reflection(&self) -> f64 {
        1.0 - self.transmission()
    }

    /// Number of directed edge states, `2MN`.
    pub fn edge_count(&self) -> usize {
        2 * self.stars * self.spokes
    }

    /// Number of junctions: `M + 1` on a chain (including START and END), `M`
    /// on a ring.
    pub fn junction_count(&self) -> usize {
        match self.topology {
            Topology::Chain => self.stars + 1,
            Topology::Ring => self.stars,
        }
    }

    pub(crate) fn slot_index(&self, star0: usize, direction: Direction, slot: usize) -> usize {
        let n = self.spokes;
        star0 * 2 * n
            + match direction {
                Direction::Outward => 0,
                Direction::Inward => n,
            }
            + slot
    }

    fn previous_junction(&self, star: usize) -> usize {
        match (self.topology, star) {
            (Topology::Ring, 1) => self.stars,
            _ => star - 1,
        }
    }

    fn slot_vertex(&self, star: usize, slot: usize) -> Vertex {
        match slot {
            0 => Vertex::Junction(self.previous_junction(star)),
            1 => Vertex::Junction(star),
            k => Vertex::Spoke { star, spoke: k },
        }
    }

    pub fn is_valid_vertex(&self, v: Vertex) -> bool {
        match v {
            Vertex::Center(j) => (1..=self.stars).contains(&j),
            Vertex::Spoke { star, spoke } => {
                (1..=self.stars).contains(&star) && (2..self.spokes).contains(&spoke)
            }
            Vertex::Junction(k) => match self.topology {
                Topology::Chain => k <= self.stars,
                Topology::Ring => (1..=self.stars).contains(&k),
            },
        }
    }

    /// Internal neighbors of a vertex.
    pub fn adjacent(&self, v: Vertex) -> Result<Vec<Vertex>> {
        if !self.is_valid_vertex(v) {
            return Err(Error::InvalidEdge(format!("{v:?} is not a vertex")));
        }
        Ok(match v {
            Vertex::Center(j) => (0..self.spokes).map(|l| self.slot_vertex(j, l)).collect(),
            Vertex::Spoke { star, .. } => vec![Vertex::Center(star)],
            Vertex::Junction(k) => match self.topology {
                Topology::Chain if k == 0 => vec![Vertex::Center(1)],
                Topology::Chain if k == self.stars => vec![Vertex::Center(k)],
                Topology::Chain => vec![Vertex::Center(k), Vertex::Center(k + 1)],
                Topology::Ring => vec![Vertex::Center(k), Vertex::Center(k % self.stars + 1)],
            },
        })
    }

    /// Star and slot of the edge between center `A_star` and `other`.
    fn locate(&self, star: usize, other: Vertex) -> Option<usize> {
        match other {
            Vertex::Spoke { star: s, spoke } if s == star && (2..self.spokes).contains(&spoke) => {
                Some(spoke)
            }
            Vertex::Junction(k) if k == star => Some(1),
            Vertex::Junction(k) if k == self.previous_junction(star) => Some(0),
            _ => None,
        }
    }

    /// Canonical index of a directed edge.
    pub fn edge_index(&self, e: DirectedEdge) -> Result<usize> {
        let bad = || Error::InvalidEdge(format!("{e:?}"));
        if !self.is_valid_vertex(e.tail) || !self.is_valid_vertex(e.head) {
            return Err(bad());
        }
        let (star, other, direction) = match (e.tail, e.head) {
            (Vertex::Center(j), other) if !matches!(other, Vertex::Center(_)) => {
                (j, other, Direction::Outward)
            }
            (other, Vertex::Center(j)) if !matches!(other, Vertex::Center(_)) => {
                (j, other, Direction::Inward)
            }
            _ => return Err(bad()),
        };
        let slot = self.locate(star, other).ok_or_else(bad)?;
        Ok(self.slot_index(star - 1, direction, slot))
    }

    /// Inverse of [`MazeSpec::edge_index`].
    pub fn index_edge(&self, index: usize) -> Result<DirectedEdge> {
        let (star0, direction, slot) = self.decompose(index)?;
        let center = Vertex::Center(star0 + 1);
        let other = self.slot_vertex(star0 + 1, slot);
        Ok(match direction {
            Direction::Outward => DirectedEdge::new(center, other),
            Direction::Inward => DirectedEdge::new(other, center),
        })
    }

    pub(crate) fn decompose(&self, index: usize) -> Result<(usize, Direction, usize)> {
        if index >= self.edge_count() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.edge_count(),
            });
        }
        let n = self.spokes;
        let star0 = index / (2 * n);
        let rem = index % (2 * n);
        let direction = if rem < n {
            Direction::Outward
        } else {
            Direction::Inward
        };
        Ok((star0, direction, rem % n))
    }

    /// External name of a vertex.
    pub fn vertex_name(&self, v: Vertex) -> Result<String> {
        if !self.is_valid_vertex(v) {
            return Err(Error::InvalidEdge(format!("{v:?} is not a vertex")));
        }
        Ok(match v {
            Vertex::Center(j) => format!("A{j}"),
            Vertex::Spoke { star, spoke } => format!("B{star}:{}", self.label_maps[star - 1][spoke - 1]),
            Vertex::Junction(0) => "S".to_string(),
            Vertex::Junction(k) => format!("B{k}:{}", self.label_maps[k - 1][0]),
        })
    }

    /// Resolves an external name. Only the oracle and state preparation on
    /// already-discovered vertices go through here.
    pub fn vertex_by_name(&self, name: &str) -> Result<Vertex> {
        let unknown = || Error::UnknownVertex(name.to_string());
        let chain = self.topology == Topology::Chain;
        match name {
            "S" if chain => return Ok(Vertex::Junction(0)),
            "E" if chain => return Ok(Vertex::Junction(self.stars)),
            _ => {}
        }
        if let Some(rest) = name.strip_prefix('A') {
            let j: usize = parse_index(rest).ok_or_else(unknown)?;
            let v = Vertex::Center(j);
            return if self.is_valid_vertex(v) { Ok(v) } else { Err(unknown()) };
        }
        let rest = name.strip_prefix('B').ok_or_else(unknown)?;
        let (star, label) = rest.split_once(':').ok_or_else(unknown)?;
        let star: usize = parse_index(star).ok_or_else(unknown)?;
        let label: usize = parse_index(label).ok_or_else(unknown)?;
        if !(1..=self.stars).contains(&star) {
            return Err(unknown());
        }
        let spoke = *self.inverse[star - 1]
            .get(label)
            .filter(|&&k| k != 0)
            .ok_or_else(unknown)? as usize;
        Ok(if spoke == 1 {
            Vertex::Junction(star)
        } else {
            Vertex::Spoke { star, spoke }
        })
    }

    pub fn is_start(&self, v: Vertex) -> bool {
        self.topology == Topology::Chain && v == Vertex::Junction(0)
    }

    pub fn is_end(&self, v: Vertex) -> bool {
        self.topology == Topology::Chain && v == Vertex::Junction(self.stars)
    }

    /// The neighbor oracle: names of the neighbors of `name` plus START/END
    /// flags for the queried vertex itself.
    ///
    /// A center's neighbors are listed as the previous junction followed by
    /// its own spokes in label order, so the list position reveals nothing.
    pub fn neighbors(&self, name: &str) -> Result<NeighborAnswer> {
        let v = self.vertex_by_name(name)?;
        let neighbors = match v {
            Vertex::Center(j) => {
                let mut names = Vec::with_capacity(self.spokes);
                names.push(self.vertex_name(self.slot_vertex(j, 0))?);
                names.extend((1..self.spokes).map(|label| format!("B{j}:{label}")));
                names
            }
            other => self
                .adjacent(other)?
                .into_iter()
                .map(|u| self.vertex_name(u))
                .collect::<Result<_>>()?,
        };
        Ok(NeighborAnswer {
            neighbors,
            is_start: self.is_start(v),
            is_end: self.is_end(v),
        })
    }

    /// Ground-truth path. Privileged: recovery strategies never call it.
    ///
    /// On a chain this is `["S", B1, ..., B(M-1), END]` with END under its
    /// spoke name; on a ring it lists the `M` junctions in order.
    pub fn reveal_path(&self) -> Vec<String> {
        let first = match self.topology {
            Topology::Chain => 0,
            Topology::Ring => 1,
        };
        (first..=self.stars)
            .map(|k| self.vertex_name(Vertex::Junction(k)).expect("junction in range"))
            .collect()
    }
}

fn parse_index(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

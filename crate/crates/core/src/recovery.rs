//! Path recovery: repeated walk-and-measure strategies and the classical
//! probing baseline.
//!
//! Strategies see the maze only through external names: measured edges come
//! back as labels, and every classification goes through the neighbor oracle.
//! The evolved state of a stage is a deterministic function of the maze, so
//! it is computed once and re-measured on every round of that stage.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{optimal_steps_localized, optimal_steps_superposed};
use crate::error::{Error, Result};
use crate::maze::{MazeSpec, NeighborAnswer, Topology};
use crate::walk::{measure, prepare, MeasurementOutcome, Propagator, StatePrescription, WalkState};

pub const DEFAULT_MAX_ROUNDS_PER_STAGE: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Superposed,
    Successive,
    UnknownStart,
    Classical,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [
        Self::Superposed,
        Self::Successive,
        Self::UnknownStart,
        Self::Classical,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Superposed => "superposed",
            Self::Successive => "successive",
            Self::UnknownStart => "unknown-start",
            Self::Classical => "classical",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::OutOfRange(format!("unknown strategy {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub strategy: Strategy,
    pub max_rounds_per_stage: u32,
    pub trials: u32,
    pub master_seed: u64,
    /// Replaces the optimal step count of every round. Must be even.
    pub step_override: Option<u64>,
}

impl RecoveryConfig {
    pub fn new(strategy: Strategy) -> Self {
        Self {
            strategy,
            max_rounds_per_stage: DEFAULT_MAX_ROUNDS_PER_STAGE,
            trials: 1,
            master_seed: 0,
            step_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::OutOfRange("trials must be at least 1".into()));
        }
        if self.max_rounds_per_stage == 0 {
            return Err(Error::OutOfRange("max_rounds_per_stage must be at least 1".into()));
        }
        if let Some(s) = self.step_override {
            if s % 2 == 1 {
                return Err(Error::OddSteps(s));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub round: u32,
    pub outcome: MeasurementOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecoveryResult {
    /// External names from START to END; truncated on failure.
    pub path: Vec<String>,
    pub success: bool,
    pub total_unitary_applications: u64,
    pub total_oracle_queries: u64,
    /// Per stage: rounds used. For the superposed strategy: per junction
    /// `0..=M`, the round at which it was first seen (0 if never).
    pub rounds_per_connection: Vec<u32>,
    pub measurement_log: Vec<LogEntry>,
    pub total_rounds: u32,
    pub steps_per_round: u64,
}

/// What a measured vertex turned out to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sighting {
    Start,
    End,
    /// An interior junction between stars `k` and `k + 1`.
    Connection(usize),
    /// A dead-end spoke or anything else uninformative.
    Nothing,
}

/// The neighbor oracle with memoization and a query counter.
pub struct Oracle<'a> {
    maze: &'a MazeSpec,
    cache: HashMap<String, NeighborAnswer>,
    queries: u64,
}

impl<'a> Oracle<'a> {
    pub fn new(maze: &'a MazeSpec) -> Self {
        Self {
            maze,
            cache: HashMap::new(),
            queries: 0,
        }
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    /// Answers a query; repeated questions are answered from memory for free.
    pub fn ask(&mut self, name: &str) -> Result<&NeighborAnswer> {
        if !self.cache.contains_key(name) {
            let answer = self.maze.neighbors(name)?;
            self.queries += 1;
            self.cache.insert(name.to_string(), answer);
        }
        Ok(&self.cache[name])
    }

    pub fn classify(&mut self, name: &str) -> Result<Sighting> {
        let stars = self.maze.stars();
        let ring = self.maze.topology() == Topology::Ring;
        let answer = self.ask(name)?;
        if answer.is_start {
            return Ok(Sighting::Start);
        }
        if answer.is_end {
            return Ok(Sighting::End);
        }
        if answer.degree() != 2 {
            return Ok(Sighting::Nothing);
        }
        let centers: Option<Vec<usize>> = answer
            .neighbors
            .iter()
            .map(|n| n.strip_prefix('A').and_then(|j| j.parse().ok()))
            .collect();
        Ok(match centers.as_deref() {
            Some(&[a, b]) => {
                let (lo, hi) = (a.min(b), a.max(b));
                if hi == lo + 1 {
                    Sighting::Connection(lo)
                } else if ring && lo == 1 && hi == stars {
                    Sighting::Connection(stars)
                } else {
                    Sighting::Nothing
                }
            }
            _ => Sighting::Nothing,
        })
    }
}

fn require_chain(maze: &MazeSpec) -> Result<()> {
    if maze.topology() == Topology::Chain {
        Ok(())
    } else {
        Err(Error::Topology("path recovery needs a chain".into()))
    }
}

fn evolved(maze: &MazeSpec, p: StatePrescription, steps: u64) -> Result<WalkState> {
    let mut s = prepare(maze, p)?;
    Propagator::new(maze).advance(&mut s, steps);
    Ok(s)
}

/// Bookkeeping shared by the quantum strategies.
struct Run<'a> {
    oracle: Oracle<'a>,
    log: Vec<LogEntry>,
    rounds: u32,
    steps: u64,
}

impl<'a> Run<'a> {
    fn new(maze: &'a MazeSpec, steps: u64) -> Self {
        Self {
            oracle: Oracle::new(maze),
            log: Vec::new(),
            rounds: 0,
            steps,
        }
    }

    /// One round: measure a fresh copy of `state`, classify the outcome.
    fn round<R: Rng + ?Sized>(&mut self, maze: &MazeSpec, state: &WalkState, rng: &mut R) -> Result<(Sighting, String)> {
        self.rounds += 1;
        let outcome = measure(maze, state, rng);
        let name = outcome.external_vertex().to_string();
        self.log.push(LogEntry {
            round: self.rounds,
            outcome,
        });
        let sighting = self.oracle.classify(&name)?;
        Ok((sighting, name))
    }

    fn finish(self, path: Vec<String>, success: bool, rounds_per_connection: Vec<u32>) -> RecoveryResult {
        RecoveryResult {
            path,
            success,
            total_unitary_applications: u64::from(self.rounds) * self.steps,
            total_oracle_queries: self.oracle.queries(),
            rounds_per_connection,
            measurement_log: self.log,
            total_rounds: self.rounds,
            steps_per_round: self.steps,
        }
    }
}

/// Junction names found so far, indexed `0..=M`.
fn assemble(found: &[Option<String>]) -> (Vec<String>, bool) {
    let path: Vec<String> = found.iter().map_while(|x| x.clone()).collect();
    let complete = path.len() == found.len();
    (path, complete)
}

/// Repeats the superposed search until every junction, START and END
/// included, has been observed. The budget is pooled over the whole run:
/// `max_rounds_per_stage × (M + 1)` rounds.
pub fn recover_superposed<R: Rng + ?Sized>(maze: &MazeSpec, config: &RecoveryConfig, rng: &mut R) -> Result<RecoveryResult> {
    require_chain(maze)?;
    config.validate()?;
    if maze.spokes() < 5 {
        return Err(Error::Sizing("superposed recovery needs N >= 5".into()));
    }
    let m = maze.stars();
    let steps = match config.step_override {
        Some(s) => s,
        None => optimal_steps_superposed(maze.spokes())?,
    };
    let state = evolved(maze, StatePrescription::SuperposedInit, steps)?;
    let mut run = Run::new(maze, steps);
    let mut found: Vec<Option<String>> = vec![None; m + 1];
    let mut first_seen = vec![0u32; m + 1];
    found[0] = Some("S".to_string());
    let budget = config.max_rounds_per_stage as u64 * (m as u64 + 1);
    let mut seen_start = false;
    while u64::from(run.rounds) < budget {
        let (sighting, name) = run.round(maze, &state, rng)?;
        let slot = match sighting {
            Sighting::Start => Some(0),
            Sighting::End => Some(m),
            Sighting::Connection(k) if k < m => Some(k),
            _ => None,
        };
        if let Some(k) = slot {
            if k == 0 {
                seen_start = true;
            } else {
                found[k].get_or_insert(name);
            }
            if first_seen[k] == 0 {
                first_seen[k] = run.rounds;
            }
        }
        if seen_start && found.iter().all(Option::is_some) {
            break;
        }
    }
    let (path, complete) = assemble(&found);
    let success = complete && seen_start;
    Ok(run.finish(path, success, first_seen))
}

/// Finds the connections one at a time, each stage starting from the last
/// one found (START for the first stage).
pub fn recover_successive<R: Rng + ?Sized>(maze: &MazeSpec, config: &RecoveryConfig, rng: &mut R) -> Result<RecoveryResult> {
    require_chain(maze)?;
    config.validate()?;
    let m = maze.stars();
    let steps = match config.step_override {
        Some(s) => s,
        None => optimal_steps_localized(maze.spokes())?,
    };
    let mut run = Run::new(maze, steps);
    let mut path = vec!["S".to_string()];
    let mut per_stage = Vec::with_capacity(m);
    for stage in 0..m {
        let p = if stage == 0 {
            StatePrescription::LocalizedStart
        } else {
            StatePrescription::LocalizedConnection(stage)
        };
        let state = evolved(maze, p, steps)?;
        let mut used = 0;
        let mut hit = None;
        while used < config.max_rounds_per_stage {
            used += 1;
            let (sighting, name) = run.round(maze, &state, rng)?;
            let wanted = if stage + 1 == m {
                sighting == Sighting::End
            } else {
                sighting == Sighting::Connection(stage + 1)
            };
            if wanted {
                hit = Some(name);
                break;
            }
        }
        per_stage.push(used);
        match hit {
            Some(name) => path.push(name),
            None => return Ok(run.finish(path, false, per_stage)),
        }
    }
    Ok(run.finish(path, true, per_stage))
}

/// Recovery without knowing where START is, from superpositions over two
/// neighboring stars with opposite signs. Stage `j` uses stars `j, j+1` and
/// runs until connection `j` is known (and START at the first stage, END at
/// the last). Side sightings of other junctions are kept and can make later
/// stages unnecessary.
pub fn recover_unknown_start<R: Rng + ?Sized>(maze: &MazeSpec, config: &RecoveryConfig, rng: &mut R) -> Result<RecoveryResult> {
    require_chain(maze)?;
    config.validate()?;
    let m = maze.stars();
    let steps = match config.step_override {
        Some(s) => s,
        None => optimal_steps_superposed(maze.spokes())?,
    };
    let mut run = Run::new(maze, steps);
    let mut found: Vec<Option<String>> = vec![None; m + 1];
    let mut per_stage = Vec::new();
    let stages: Vec<(StatePrescription, Vec<usize>)> = if m == 1 {
        vec![(StatePrescription::SuperposedInit, vec![0, 1])]
    } else {
        (1..m)
            .map(|j| {
                let mut need = vec![j];
                if j == 1 {
                    need.push(0);
                }
                if j + 1 == m {
                    need.push(m);
                }
                (StatePrescription::TwoStar(j), need)
            })
            .collect()
    };
    for (p, need) in stages {
        if need.iter().all(|&k| found[k].is_some()) {
            continue;
        }
        let state = evolved(maze, p, steps)?;
        let mut used = 0;
        while used < config.max_rounds_per_stage && need.iter().any(|&k| found[k].is_none()) {
            used += 1;
            let (sighting, name) = run.round(maze, &state, rng)?;
            let slot = match sighting {
                Sighting::Start => Some(0),
                Sighting::End => Some(m),
                Sighting::Connection(k) if k < m => Some(k),
                _ => None,
            };
            if let Some(k) = slot {
                found[k].get_or_insert(name);
            }
        }
        per_stage.push(used);
        if need.iter().any(|&k| found[k].is_none()) {
            let (path, _) = assemble(&found);
            return Ok(run.finish(path, false, per_stage));
        }
    }
    let (path, complete) = assemble(&found);
    Ok(run.finish(path, complete, per_stage))
}

/// Classical probing: for each star, ask about its spoke labels in random
/// order until the connection (or END, on the last star) answers.
pub fn classical_baseline<R: Rng + ?Sized>(maze: &MazeSpec, config: &RecoveryConfig, rng: &mut R) -> Result<RecoveryResult> {
    require_chain(maze)?;
    config.validate()?;
    let m = maze.stars();
    let mut oracle = Oracle::new(maze);
    let mut path = vec!["S".to_string()];
    let mut per_star = Vec::with_capacity(m);
    for j in 1..=m {
        let mut labels: Vec<usize> = (1..maze.spokes()).collect();
        labels.shuffle(rng);
        let before = oracle.queries();
        let mut hit = None;
        for label in labels {
            let name = format!("B{j}:{label}");
            let sighting = oracle.classify(&name)?;
            let wanted = if j == m {
                sighting == Sighting::End
            } else {
                sighting == Sighting::Connection(j)
            };
            if wanted {
                hit = Some(name);
                break;
            }
        }
        per_star.push((oracle.queries() - before) as u32);
        match hit {
            Some(name) => path.push(name),
            None => break,
        }
    }
    let success = path.len() == m + 1;
    Ok(RecoveryResult {
        path,
        success,
        total_unitary_applications: 0,
        total_oracle_queries: oracle.queries(),
        rounds_per_connection: per_star,
        measurement_log: Vec::new(),
        total_rounds: 0,
        steps_per_round: 0,
    })
}

/// Runs the configured strategy once.
pub fn recover<R: Rng + ?Sized>(maze: &MazeSpec, config: &RecoveryConfig, rng: &mut R) -> Result<RecoveryResult> {
    match config.strategy {
        Strategy::Superposed => recover_superposed(maze, config, rng),
        Strategy::Successive => recover_successive(maze, config, rng),
        Strategy::UnknownStart => recover_unknown_start(maze, config, rng),
        Strategy::Classical => classical_baseline(maze, config, rng),
    }
}

/// The RNG of trial `index`: one ChaCha stream per trial under the master seed.
pub fn trial_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub strategy: Strategy,
    pub trials: u32,
    pub successes: u32,
    pub success_rate: f64,
    pub mean_rounds: f64,
    pub mean_unitary_applications: f64,
    pub mean_oracle_queries: f64,
}

impl TrialSummary {
    pub fn from_results(strategy: Strategy, results: &[RecoveryResult]) -> Self {
        let n = results.len().max(1) as f64;
        let successes = results.iter().filter(|r| r.success).count() as u32;
        let mean = |f: &dyn Fn(&RecoveryResult) -> f64| results.iter().map(f).sum::<f64>() / n;
        Self {
            strategy,
            trials: results.len() as u32,
            successes,
            success_rate: f64::from(successes) / n,
            mean_rounds: mean(&|r| f64::from(r.total_rounds)),
            mean_unitary_applications: mean(&|r| r.total_unitary_applications as f64),
            mean_oracle_queries: mean(&|r| r.total_oracle_queries as f64),
        }
    }
}

/// Runs `config.trials` independent trials in parallel. Results come back in
/// trial order, so the output does not depend on scheduling.
pub fn run_trials(maze: &MazeSpec, config: &RecoveryConfig) -> Result<(Vec<RecoveryResult>, TrialSummary)> {
    config.validate()?;
    let results = (0..config.trials)
        .into_par_iter()
        .map(|i| recover(maze, config, &mut trial_rng(config.master_seed, u64::from(i))))
        .collect::<Result<Vec<_>>>()?;
    let summary = TrialSummary::from_results(config.strategy, &results);
    Ok((results, summary))
}

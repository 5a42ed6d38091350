//! End-to-end acceptance checks at full problem sizes.
//!
//! Every test prints one `criterion N: PASS|FAIL ...` line before asserting.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use qwalk_cli::{curve_csv, CurveInit, CURVE_HEADER};
use qwalk_core::analytic::{optimal_steps_superposed, ChainModel, RingSpectrum};
use qwalk_core::maze::build_maze;
use qwalk_core::recovery::{run_trials, trial_rng, Oracle, RecoveryConfig, RecoveryResult, Sighting, Strategy};
use qwalk_core::verify::{bound_scan, orthonormality_residual, subspace_residual};
use qwalk_core::walk::{connection_amplitudes, measure, path_probability, prepare, Propagator};
use qwalk_core::{MazeSpec, StatePrescription, Topology, Vertex, WalkState};
use rand::Rng;
use rayon::prelude::*;

fn verdict(criterion: u32, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {tag} {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn chain(m: usize, n: usize, seed: u64) -> MazeSpec {
    build_maze(Topology::Chain, m, n, seed).unwrap()
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (s, c) = xs.into_iter().fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    s / c as f64
}

fn trials(maze: &MazeSpec, strategy: Strategy, count: u32, seed: u64) -> Vec<RecoveryResult> {
    let mut config = RecoveryConfig::new(strategy);
    config.trials = count;
    config.master_seed = seed;
    run_trials(maze, &config).unwrap().0
}

fn evolved(maze: &MazeSpec, p: StatePrescription, steps: u64) -> WalkState {
    let mut s = prepare(maze, p).unwrap();
    Propagator::new(maze).advance(&mut s, steps);
    s
}

/// Least squares `y = a + b x`; returns `(a, b, R²)`.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let mx = mean(x.iter().copied());
    let my = mean(y.iter().copied());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope, sxy * sxy / (sxx * syy))
}

#[test]
fn criterion_01_unitarity_and_subspace() {
    let t0 = Instant::now();
    let mut ortho: f64 = 0.0;
    let mut sub: f64 = 0.0;
    for (m, n) in [(2, 4), (3, 8), (5, 16)] {
        let maze = chain(m, n, 1);
        ortho = ortho.max(orthonormality_residual(&maze));
        sub = sub.max(subspace_residual(&maze).unwrap());
    }
    let elapsed = t0.elapsed();
    verdict(
        1,
        ortho <= 1e-12 && sub <= 1e-12 && elapsed < Duration::from_secs(10),
        &format!("orthonormality {ortho:.2e}, subspace {sub:.2e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_grover_reduction() {
    let t0 = Instant::now();
    let (m, n) = (5, 100);
    let maze = chain(m, n, 2);
    let theta = (1.0 - 4.0 / n as f64).acos();
    let n0 = PI / (2.0 * theta);
    let law = |half: u64| ((2 * half + 1) as f64 * theta / 2.0).sin().powi(2);
    let mut s = prepare(&maze, StatePrescription::SuperposedInit).unwrap();
    let mut prop = Propagator::new(&maze);
    let mut worst: f64 = 0.0;
    let mut probs = Vec::new();
    for half in 0..=(4.0 * n0).floor() as u64 {
        let p = path_probability(&maze, &s);
        worst = worst.max((p - law(half)).abs());
        probs.push(p);
        prop.advance(&mut s, 2);
    }
    let nearest = 2 * (PI / theta / 2.0).round() as usize;
    let peak = probs[nearest / 2];
    let floor = 1.0 - 8.0 / n as f64 - 2.0 * (2.0 / n as f64).sqrt();
    let elapsed = t0.elapsed();
    verdict(
        2,
        worst <= 1e-10 && peak >= floor && elapsed < Duration::from_secs(30),
        &format!("max gap {worst:.2e}; p({nearest}) = {peak:.4} >= {floor:.4}; {elapsed:.2?}"),
    );
}

#[test]
fn criterion_03_ring_exactness() {
    let t0 = Instant::now();
    let worst = [(5usize, 20usize), (11, 450)]
        .par_iter()
        .map(|&(m, n)| {
            let maze = build_maze(Topology::Ring, m, n, 3).unwrap();
            let spectrum = RingSpectrum::new(m, n).unwrap();
            let mut worst: f64 = 0.0;
            for from in 1..=m {
                let mut s = prepare(&maze, StatePrescription::LocalizedConnection(from)).unwrap();
                let mut prop = Propagator::new(&maze);
                for steps in (0..=100).step_by(2) {
                    for b in 0..m {
                        let target = (from - 1 + b) % m + 1;
                        let sim = connection_amplitudes(&maze, &s, target).unwrap();
                        let exact = spectrum.ring_amplitude_exact(b, steps).unwrap();
                        worst = worst
                            .max((sim.e_plus - exact.e_plus).abs())
                            .max((sim.e_minus - exact.e_minus).abs());
                    }
                    prop.advance(&mut s, 2);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = t0.elapsed();
    verdict(
        3,
        worst <= 1e-9 && elapsed < Duration::from_secs(120),
        &format!("max amplitude gap {worst:.2e}; {elapsed:.2?}"),
    );
}

#[test]
fn criterion_04_mirror_construction() {
    let t0 = Instant::now();
    // The mirrored ring is built here from scratch: star j of the chain sits at
    // ring star j and its sign-flipped image at ring star 2M + 1 - j.
    let cases: Vec<(usize, usize, usize)> = vec![(4, 16, 0), (4, 16, 1), (4, 16, 3), (11, 450, 0), (11, 450, 5)];
    let worst = cases
        .par_iter()
        .map(|&(m, n, from)| {
            let chain_maze = chain(m, n, 4);
            let ring_maze = build_maze(Topology::Ring, 2 * m, n, 4).unwrap();
            let p = if from == 0 {
                StatePrescription::LocalizedStart
            } else {
                StatePrescription::LocalizedConnection(from)
            };
            let mut s = prepare(&chain_maze, p).unwrap();
            let mut r = mirror_embed(&chain_maze, &ring_maze, &s);
            let mut cp = Propagator::new(&chain_maze);
            let mut rp = Propagator::new(&ring_maze);
            let mut worst: f64 = 0.0;
            for _ in (0..=100).step_by(2) {
                let normal = normal_side(&chain_maze, &ring_maze, &r);
                for (a, b) in normal.iter().zip(s.amplitudes()) {
                    worst = worst.max((a - b).abs());
                }
                cp.advance(&mut s, 2);
                rp.advance(&mut r, 2);
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    let elapsed = t0.elapsed();
    verdict(
        4,
        worst <= 1e-10 && elapsed < Duration::from_secs(120),
        &format!("max chain vs mirrored-ring gap {worst:.2e}; {elapsed:.2?}"),
    );
}

/// Position of a chain edge on the mirrored ring and the image of it.
fn ring_images(chain_maze: &MazeSpec, ring_maze: &MazeSpec, index: usize) -> (usize, usize) {
    let m = chain_maze.stars();
    let e = chain_maze.index_edge(index).unwrap();
    let map = |v: Vertex, mirrored: bool| -> Vertex {
        match v {
            Vertex::Center(j) => Vertex::Center(if mirrored { 2 * m + 1 - j } else { j }),
            Vertex::Spoke { star, spoke } => Vertex::Spoke {
                star: if mirrored { 2 * m + 1 - star } else { star },
                spoke,
            },
            // ring junction k joins ring stars k and k + 1; START sits
            // between ring stars 2M and 1, END between M and M + 1
            Vertex::Junction(k) => {
                let k = if mirrored { (2 * m - k) % (2 * m) } else { k };
                Vertex::Junction(if k == 0 { 2 * m } else { k })
            }
        }
    };
    let direct = ring_maze
        .edge_index(qwalk_core::DirectedEdge::new(map(e.tail, false), map(e.head, false)))
        .unwrap();
    let image = ring_maze
        .edge_index(qwalk_core::DirectedEdge::new(map(e.tail, true), map(e.head, true)))
        .unwrap();
    (direct, image)
}

fn mirror_embed(chain_maze: &MazeSpec, ring_maze: &MazeSpec, s: &WalkState) -> WalkState {
    let mut amps = vec![0.0; ring_maze.edge_count()];
    for (i, &a) in s.amplitudes().iter().enumerate() {
        let (direct, image) = ring_images(chain_maze, ring_maze, i);
        amps[direct] += a / 2f64.sqrt();
        amps[image] -= a / 2f64.sqrt();
    }
    WalkState::from_amplitudes(amps)
}

fn normal_side(chain_maze: &MazeSpec, ring_maze: &MazeSpec, r: &WalkState) -> Vec<f64> {
    (0..chain_maze.edge_count())
        .map(|i| {
            let (direct, image) = ring_images(chain_maze, ring_maze, i);
            (r.amplitude(direct) - r.amplitude(image)) / 2f64.sqrt()
        })
        .collect()
}

struct Curve {
    steps: Vec<u64>,
    simulated: Vec<f64>,
    exact: Vec<f64>,
    bessel: Vec<f64>,
}

fn parse_curve(csv: &str) -> Curve {
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    assert_eq!(lines.next().unwrap(), CURVE_HEADER);
    let mut c = Curve {
        steps: Vec::new(),
        simulated: Vec::new(),
        exact: Vec::new(),
        bessel: Vec::new(),
    };
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 6);
        c.steps.push(f[0].parse().unwrap());
        c.simulated.push(f[1].parse().unwrap());
        c.exact.push(f[2].parse().unwrap());
        c.bessel.push(f[3].parse().unwrap());
    }
    c
}

#[test]
fn criterion_05_curves_at_full_scale() {
    let t0 = Instant::now();
    let maze = chain(11, 450, 5);
    let families = [
        (CurveInit::Start, 1usize),
        (CurveInit::Connection(1), 2),
        (CurveInit::Connection(5), 6),
    ];
    let curves: Vec<Curve> = families
        .iter()
        .map(|&(init, target)| parse_curve(&curve_csv(&maze, init, target, 100).unwrap()))
        .collect();
    let mut exact_gap: f64 = 0.0;
    let mut bessel_gap: f64 = 0.0;
    for c in &curves {
        for i in 0..c.steps.len() {
            exact_gap = exact_gap.max((c.simulated[i] - c.exact[i]).abs());
            if c.steps[i] <= 60 {
                bessel_gap = bessel_gap.max((c.bessel[i] - c.exact[i]).abs());
            }
        }
    }
    let middle = &curves[2];
    let at48 = middle.simulated[middle.steps.iter().position(|&s| s == 48).unwrap()];
    let start = &curves[0];
    let peak_step = start.steps[start
        .simulated
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0];
    let elapsed = t0.elapsed();
    verdict(
        5,
        exact_gap <= 1e-9
            && bessel_gap <= 0.02
            && (at48 - 0.25).abs() <= 0.05
            && (40..=56).contains(&peak_step)
            && elapsed < Duration::from_secs(60),
        &format!(
            "exact gap {exact_gap:.2e}, bessel gap {bessel_gap:.4}, middle p(48) = {at48:.4}, start peak at {peak_step}; {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_06_integer_step_bounds() {
    let t0 = Instant::now();
    let scans: Vec<_> = [16usize, 64, 256, 1024]
        .par_iter()
        .map(|&n| bound_scan(n).unwrap())
        .collect();
    let mut pass = true;
    let mut detail = Vec::new();
    for (n, scan) in [16, 64, 256, 1024].iter().zip(&scans) {
        let want = [
            2.0 * (2.0 / *n as f64).sqrt(),
            8.0 / *n as f64,
            16.0 / (*n as f64).sqrt(),
        ];
        for (c, bound) in scan.iter().zip(want) {
            assert!((c.bound - bound).abs() < 1e-15, "{}", c.label);
            pass &= c.measured <= bound;
        }
        detail.push(format!(
            "N={n}: {:.4}/{:.4} {:.5}/{:.5} {:.4}/{:.4}",
            scan[0].measured, want[0], scan[1].measured, want[1], scan[2].measured, want[2]
        ));
    }
    let elapsed = t0.elapsed();
    verdict(6, pass && elapsed < Duration::from_secs(60), &format!("{}; {elapsed:.2?}", detail.join("; ")));
}

/// Coupon collector over the junctions with the weights the measured walk
/// state actually puts on them; the rest of the mass reveals nothing.
fn coupon_collector_mean(weights: &[f64], runs: u32, seed: u64) -> f64 {
    let total: f64 = weights.iter().sum();
    let mut rng = trial_rng(seed, 0);
    let mut sum = 0u64;
    for _ in 0..runs {
        let mut seen = vec![false; weights.len()];
        let mut missing = weights.len();
        let mut rounds = 0u64;
        while missing > 0 {
            rounds += 1;
            let mut u: f64 = rng.random();
            if u >= total {
                continue;
            }
            for (k, w) in weights.iter().enumerate() {
                if u < *w {
                    if !seen[k] {
                        seen[k] = true;
                        missing -= 1;
                    }
                    break;
                }
                u -= w;
            }
        }
        sum += rounds;
    }
    sum as f64 / f64::from(runs)
}

#[test]
fn criterion_07_coupon_collector() {
    let t0 = Instant::now();
    let (m, n) = (20, 100);
    let maze = chain(m, n, 7);
    let results = trials(&maze, Strategy::Superposed, 1000, 70);
    let success = results.iter().filter(|r| r.success).count();
    let measured = mean(results.iter().map(|r| f64::from(r.total_rounds)));

    let steps = optimal_steps_superposed(n).unwrap();
    let state = evolved(&maze, StatePrescription::SuperposedInit, steps);
    let junction_of: HashMap<Vertex, usize> = (0..=m).map(|k| (Vertex::Junction(k), k)).collect();
    let mut weights = vec![0.0; m + 1];
    for (i, a) in state.amplitudes().iter().enumerate() {
        let e = maze.index_edge(i).unwrap();
        for v in [e.tail, e.head] {
            if let Some(&k) = junction_of.get(&v) {
                weights[k] += a * a;
            }
        }
    }
    let oracle = coupon_collector_mean(&weights, 20_000, 71);
    let mf = m as f64;
    let ceiling = mf * mf.ln() + mf + 2.0 * mf;
    let rel = (measured - oracle).abs() / oracle;
    let elapsed = t0.elapsed();
    verdict(
        7,
        success == 1000 && measured <= ceiling && rel <= 0.15 && elapsed < Duration::from_secs(300),
        &format!(
            "mean rounds {measured:.2} <= {ceiling:.2}, oracle {oracle:.2} (rel {rel:.3}), {success}/1000 recovered; {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_08_successive_recovery() {
    let t0 = Instant::now();
    let (m, n) = (11, 450);
    let results = trials(&chain(m, n, 8), Strategy::Successive, 500, 80);
    let rate = results.iter().filter(|r| r.success).count() as f64 / 500.0;
    let mid = mean(
        results
            .iter()
            .filter(|r| r.success)
            .flat_map(|r| r.rounds_per_connection[1..m - 1].iter().map(|&x| f64::from(x))),
    );

    let cost = |m: usize, n: usize, seed: u64| {
        mean(
            trials(&chain(m, n, seed), Strategy::Successive, 300, seed)
                .iter()
                .map(|r| r.total_unitary_applications as f64),
        )
    };
    let ms = [4usize, 8, 16];
    let by_m: Vec<f64> = ms.iter().map(|&k| cost(k, n, 81 + k as u64)).collect();
    let (_, _, r2) = linear_fit(&ms.map(|k| k as f64), &by_m);
    let ns = [112usize, 450, 1800];
    let by_n: Vec<f64> = ns.iter().map(|&k| cost(m, k, 90 + k as u64)).collect();
    let (_, exponent, _) = linear_fit(&ns.map(|k| (k as f64).ln()), &by_n.iter().map(|c| c.ln()).collect::<Vec<_>>());
    let elapsed = t0.elapsed();
    verdict(
        8,
        rate >= 0.99
            && (3.0..=5.0).contains(&mid)
            && r2 >= 0.98
            && (exponent - 0.5).abs() <= 0.1
            && elapsed < Duration::from_secs(600),
        &format!(
            "success {rate:.3}, mid-chain rounds {mid:.3}, linear-in-M R² {r2:.4}, N exponent {exponent:.3}; {elapsed:.2?}"
        ),
    );
}

/// Frequencies of START, of connection 2 and of END over `count` measurements
/// of the evolved two-star states next to each terminal.
fn two_star_frequencies(m: usize, n: usize, count: u64, seed: u64) -> (f64, f64, f64) {
    let maze = chain(m, n, seed);
    let steps = optimal_steps_superposed(n).unwrap();
    let first = evolved(&maze, StatePrescription::TwoStar(1), steps);
    let last = evolved(&maze, StatePrescription::TwoStar(m - 1), steps);
    let mut oracle = Oracle::new(&maze);
    let (mut start, mut next, mut end) = (0u64, 0u64, 0u64);
    for i in 0..count {
        let mut rng = trial_rng(seed, i);
        let a = measure(&maze, &first, &mut rng);
        match oracle.classify(a.external_vertex()).unwrap() {
            Sighting::Start => start += 1,
            Sighting::Connection(2) => next += 1,
            _ => {}
        }
        let b = measure(&maze, &last, &mut rng);
        if oracle.classify(b.external_vertex()).unwrap() == Sighting::End {
            end += 1;
        }
    }
    let c = count as f64;
    (start as f64 / c, next as f64 / c, end as f64 / c)
}

#[test]
fn criterion_09_unknown_start_probabilities() {
    let t0 = Instant::now();
    let m = 11;
    let base = two_star_frequencies(m, 450, 2000, 9);
    let mut shift: f64 = 0.0;
    let mut others = Vec::new();
    for n in [200, 800] {
        let f = two_star_frequencies(m, n, 2000, 9 + n as u64);
        shift = shift
            .max((f.0 - base.0).abs())
            .max((f.1 - base.1).abs())
            .max((f.2 - base.2).abs());
        others.push(f);
    }
    let (start, next, terminal) = base;
    let elapsed = t0.elapsed();
    let checks = [
        ("START", (start - 0.25).abs() <= 0.05),
        ("next connection", (next - 0.125).abs() <= 0.05),
        ("terminal", (terminal - 0.5).abs() <= 0.07),
        ("spoke independence", shift <= 0.03),
        ("runtime", elapsed < Duration::from_secs(600)),
    ];
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    verdict(
        9,
        failed.is_empty(),
        &format!(
            "START {start:.3} (want 0.25), next {next:.3} (want 0.125), terminal {terminal:.3} (want 0.5), \
             max shift over N=200,800 {shift:.3}; failing: {failed:?}; {elapsed:.2?}"
        ),
    );
}

#[test]
fn criterion_10_classical_baseline() {
    let t0 = Instant::now();
    let (m, n) = (10, 100);
    let results = trials(&chain(m, n, 10), Strategy::Classical, 2000, 100);
    let queries = mean(results.iter().map(|r| r.total_oracle_queries as f64));
    let target = (m * n) as f64 / 2.0;
    let elapsed = t0.elapsed();
    verdict(
        10,
        results.iter().all(|r| r.success)
            && (queries - target).abs() <= 0.05 * target
            && elapsed < Duration::from_secs(10),
        &format!("mean queries {queries:.2} vs {target}; {elapsed:.2?}"),
    );
}

#[test]
fn criterion_11_step_throughput() {
    let maze = chain(50, 1000, 11);
    assert_eq!(maze.edge_count(), 100_000);
    let mut s = prepare(&maze, StatePrescription::SuperposedInit).unwrap();
    let mut prop = Propagator::new(&maze);
    prop.advance(&mut s, 10);
    let steps = 10_000u64;
    let t0 = Instant::now();
    prop.advance(&mut s, steps);
    let per_step = t0.elapsed() / steps as u32;
    let norm_drift = (s.norm() - 1.0).abs();
    verdict(
        11,
        per_step <= Duration::from_millis(1) && norm_drift < 1e-9,
        &format!("{per_step:.2?} per step, norm drift {norm_drift:.1e}"),
    );
}

#[test]
fn chain_model_agrees_with_curve_exact_column() {
    // sanity link between the CSV exact column and the closed form
    let maze = chain(11, 450, 5);
    let c = parse_curve(&curve_csv(&maze, CurveInit::Connection(5), 6, 20).unwrap());
    let model = ChainModel::new(11, 450).unwrap();
    for (i, &steps) in c.steps.iter().enumerate() {
        assert!((c.exact[i] - model.psuc(5, 6, steps).unwrap()).abs() < 1e-15);
    }
}

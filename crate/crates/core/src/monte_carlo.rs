//! Trajectory sampling and the trajectory-level statistics built on it.
//!
//! Trial `i` of any estimator draws from stream `i` of the caller's seed, so
//! results do not depend on the number of worker threads.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Explorer;
use crate::graph::RegularGraph;
use crate::rng::{stream_rng, StreamRng};
use crate::theory::log_branch;
use crate::walk::{Kernel, WalkKind};

/// A sampled path: vertices for the simple and lazy walks, directed edges for
/// the non-backtracking walk.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    pub kind: WalkKind,
    pub states: Vec<u32>,
    pub seed: u64,
}

#[inline]
fn step(kernel: Kernel<'_>, state: usize, rng: &mut StreamRng) -> usize {
    match kernel {
        Kernel::Srw(g) => g.neighbors(state)[rng.gen_range(0..g.d())] as usize,
        Kernel::Lazy(g) => {
            if rng.gen::<bool>() {
                state
            } else {
                g.neighbors(state)[rng.gen_range(0..g.d())] as usize
            }
        }
        Kernel::Nbrw(es) => {
            let d = es.d();
            let head = es.head(state);
            let back = es.twin(state) - head * d;
            let mut slot = rng.gen_range(0..d - 1);
            if slot >= back {
                slot += 1;
            }
            head * d + slot
        }
    }
}

fn check_start(kernel: Kernel<'_>, start: usize) -> Result<()> {
    let size = kernel.space().size();
    if start >= size {
        return Err(Error::IndexOutOfRange { index: start, size });
    }
    Ok(())
}

/// Endpoint after `steps` steps from `start`.
pub fn walk_endpoint(kernel: Kernel<'_>, start: usize, steps: usize, rng: &mut StreamRng) -> usize {
    (0..steps).fold(start, |s, _| step(kernel, s, rng))
}

pub fn sample_walk(kernel: Kernel<'_>, start: usize, steps: usize, seed: u64) -> Result<Trajectory> {
    check_start(kernel, start)?;
    let mut rng = stream_rng(seed, 0);
    let mut states = Vec::with_capacity(steps + 1);
    let mut s = start;
    states.push(s as u32);
    for _ in 0..steps {
        s = step(kernel, s, &mut rng);
        states.push(s as u32);
    }
    Ok(Trajectory {
        kind: kernel.kind(),
        states,
        seed,
    })
}

/// Occupation frequencies of the endpoint after `steps` steps, over `trials`
/// independent walks from `start`.
pub fn empirical_distribution(kernel: Kernel<'_>, start: usize, steps: usize, trials: u64, seed: u64) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(Error::InvalidTrials);
    }
    check_start(kernel, start)?;
    let ends: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|i| walk_endpoint(kernel, start, steps, &mut stream_rng(seed, i)))
        .collect();
    let mut freq = vec![0.0; kernel.space().size()];
    for e in ends {
        freq[e] += 1.0;
    }
    freq.iter_mut().for_each(|x| *x /= trials as f64);
    Ok(freq)
}

/// Delta-method standard error of the plug-in estimate `½Σ|p̂ − π|` built
/// from `trials` samples.
pub fn tv_standard_error(empirical: &[f64], target: &[f64], trials: u64) -> f64 {
    let signs: Vec<f64> = empirical
        .iter()
        .zip(target)
        .map(|(p, q)| if p >= q { 1.0 } else { -1.0 })
        .collect();
    let first: f64 = signs.iter().zip(empirical).map(|(s, p)| s * p).sum();
    let second: f64 = signs.iter().zip(empirical).map(|(s, p)| s * s * p).sum();
    0.5 * ((second - first * first).max(0.0) / trials as f64).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedPoint {
    pub c: f64,
    /// `⌊c·log_{d−1} n⌋`.
    pub t: usize,
    /// Mean of `dist(X_t, u) / log_{d−1} n`.
    pub mean: f64,
    pub std_error: f64,
    /// `min(c·(d−2)/d, 1)`.
    pub predicted: f64,
}

/// Limiting normalized distance `min(c·(d−2)/d, 1)` of the simple walk at
/// time `c·log_{d−1} n`.
pub fn predicted_speed_ratio(d: usize, c: f64) -> f64 {
    (c * (d - 2) as f64 / d as f64).min(1.0)
}

/// Monte Carlo estimate of `dist(X_t, u) / log_{d−1} n` for the simple walk
/// from `u` at each `t = ⌊c·log_{d−1} n⌋`. Distances come from one BFS.
pub fn distance_speed_profile(g: &RegularGraph, u: usize, c_values: &[f64], trials: u64, seed: u64) -> Result<Vec<SpeedPoint>> {
    if trials == 0 {
        return Err(Error::InvalidTrials);
    }
    let kernel = Kernel::Srw(g);
    check_start(kernel, u)?;
    let dist = g.bfs_distances(u);
    let scale = log_branch(g.d(), g.n() as f64);
    let times: Vec<usize> = c_values.iter().map(|&c| (c * scale).floor() as usize).collect();
    let horizon = times.iter().copied().max().unwrap_or(0);

    let per_trial: Vec<Vec<f64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let mut at = vec![0.0; times.len()];
            let mut s = u;
            for t in 0..=horizon {
                for (slot, &target) in at.iter_mut().zip(&times) {
                    if target == t {
                        *slot = dist[s] as f64 / scale;
                    }
                }
                if t < horizon {
                    s = step(kernel, s, &mut rng);
                }
            }
            at
        })
        .collect();

    Ok(c_values
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let (mean, std_error) = mean_and_se(per_trial.iter().map(|r| r[j]));
            SpeedPoint {
                c,
                t: times[j],
                mean,
                std_error,
                predicted: predicted_speed_ratio(g.d(), c),
            }
        })
        .collect())
}

fn mean_and_se(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let count = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / count;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1.0).max(1.0);
    (mean, (var / count).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    pub rate: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Fraction of `burn_steps`-step walks from `start` that end at a root of
/// radius `root_radius`: a vertex K-root for the simple and lazy walks, a
/// directed root for the non-backtracking walk.
pub fn burn_in_root_rate(
    kernel: Kernel<'_>,
    start: usize,
    root_radius: usize,
    burn_steps: usize,
    trials: u64,
    seed: u64,
) -> Result<RateEstimate> {
    if trials == 0 {
        return Err(Error::InvalidTrials);
    }
    check_start(kernel, start)?;
    let ends: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|i| walk_endpoint(kernel, start, burn_steps, &mut stream_rng(seed, i)))
        .collect();

    let mut explorer = Explorer::new(kernel.graph());
    let mut cache: Vec<u8> = vec![u8::MAX; kernel.space().size()];
    let mut hits = 0u64;
    for e in ends {
        if cache[e] == u8::MAX {
            let excess = match kernel {
                Kernel::Nbrw(es) => explorer.directed_tree_excess(es, e, root_radius),
                _ => explorer.tree_excess(kernel.graph(), e, root_radius),
            };
            cache[e] = (excess == 0) as u8;
        }
        hits += cache[e] as u64;
    }
    let rate = hits as f64 / trials as f64;
    Ok(RateEstimate {
        rate,
        std_error: (rate * (1.0 - rate) / trials as f64).sqrt(),
        trials,
    })
}

/// Empirical law of the height after `t` steps of the simple walk on the
/// infinite d-regular tree, simulated directly as a reflected biased walk.
pub fn tree_height_monte_carlo(d: usize, t: usize, trials: u64, seed: u64) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(Error::InvalidTrials);
    }
    let heights: Vec<usize> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i);
            let mut h = 0usize;
            for _ in 0..t {
                // from the root every neighbor is one level down the tree
                if h == 0 || rng.gen_range(0..d) != 0 {
                    h += 1;
                } else {
                    h -= 1;
                }
            }
            h
        })
        .collect();
    let mut freq = vec![0.0; t + 1];
    for h in heights {
        freq[h] += 1.0;
    }
    freq.iter_mut().for_each(|x| *x /= trials as f64);
    Ok(freq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::graph::DirectedEdgeSpace;
    use crate::mixing::{distance_profile, tv_to_uniform};

    #[test]
    fn trajectories_respect_the_walk() {
        let g = petersen();
        let es = DirectedEdgeSpace::new(&g);
        let t = sample_walk(Kernel::Nbrw(&es), 0, 2000, 11).unwrap();
        for w in t.states.windows(2) {
            let (e, f) = (w[0] as usize, w[1] as usize);
            assert_eq!(es.tail(f), es.head(e));
            assert_ne!(f, es.twin(e));
        }
        let t = sample_walk(Kernel::Srw(&g), 0, 2000, 11).unwrap();
        for w in t.states.windows(2) {
            assert!(g.neighbors(w[0] as usize).contains(&w[1]));
        }
        assert_eq!(t, sample_walk(Kernel::Srw(&g), 0, 2000, 11).unwrap());
        assert!(sample_walk(Kernel::Srw(&g), 10, 1, 0).is_err());
    }

    #[test]
    fn srw_occupation_on_k4_is_uniform() {
        let g = k4();
        let t = sample_walk(Kernel::Srw(&g), 0, 100_000, 5).unwrap();
        let mut counts = [0usize; 4];
        for &s in &t.states[1..] {
            counts[s as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / 100_000.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn monte_carlo_tv_agrees_with_exact_evolution() {
        let g = k4();
        let kernel = Kernel::Srw(&g);
        let trials = 100_000;
        let emp = empirical_distribution(kernel, 0, 2, trials, 21).unwrap();
        let estimate = tv_to_uniform(&emp);
        let exact = distance_profile(kernel, 0, 2).unwrap().values[2];
        let se = tv_standard_error(&emp, &[0.25; 4], trials);
        assert!((estimate - exact).abs() <= 3.0 * se, "{estimate} vs {exact} (se {se})");
    }

    #[test]
    fn zero_trials_rejected() {
        let g = k4();
        assert!(matches!(
            burn_in_root_rate(Kernel::Srw(&g), 0, 1, 4, 0, 1),
            Err(Error::InvalidTrials)
        ));
        assert!(matches!(distance_speed_profile(&g, 0, &[1.0], 0, 1), Err(Error::InvalidTrials)));
    }

    #[test]
    fn burn_in_rates_on_petersen_are_degenerate() {
        let g = petersen();
        let r = burn_in_root_rate(Kernel::Srw(&g), 0, 1, 8, 500, 3).unwrap();
        assert_eq!(r.rate, 1.0);
        let es = DirectedEdgeSpace::new(&g);
        let r = burn_in_root_rate(Kernel::Nbrw(&es), 0, 2, 4, 500, 3).unwrap();
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn tree_heights_match_small_dp() {
        let f = tree_height_monte_carlo(3, 2, 60_000, 9).unwrap();
        assert!((f[0] - 1.0 / 3.0).abs() < 0.01);
        assert_eq!(f[1], 0.0);
    }
}

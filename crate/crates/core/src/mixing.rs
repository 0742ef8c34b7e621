//! Total-variation profiles and mixing times, plus the exact checks built on
//! them: Poissonization statistic, the simple/non-backtracking duality and a
//! power-iteration spectral estimate.

use std::fmt;
use std::io::{self, Write};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{trajectory_count_vector, TrajectoryCounts};
use crate::graph::{validate, DirectedEdgeSpace, RegularGraph};
use crate::rng::stream_rng;
use crate::theory::tree_height_distribution;
use crate::walk::{project_values, Evolution, Kernel, ProbVector, StateSpace, WalkKind};

/// Half the L1 distance between two distributions on the same space.
pub fn tv_distance(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    if p.space() != q.space() {
        return Err(Error::SpaceMismatch {
            expected: p.space().to_string(),
            found: q.space().to_string(),
        });
    }
    Ok(half_l1(p.values(), q.values()))
}

fn half_l1(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Distance from the uniform distribution on `values.len()` states, summed
/// as `Σ (1/N − μ(y))⁺`. Equal to half the L1 distance for unit mass, and
/// exact when `μ` vanishes wherever it falls below uniform.
pub fn tv_to_uniform(values: &[f64]) -> f64 {
    let u = 1.0 / values.len() as f64;
    values.iter().map(|&a| (u - a).max(0.0)).sum::<f64>().min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartPolicy {
    /// Every state; the profile is the true worst case.
    All,
    /// `count` distinct states drawn with `seed`; a lower bound on the worst case.
    Sample { count: usize, seed: u64 },
    Single(usize),
}

impl fmt::Display for StartPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::All => write!(f, "all"),
            Self::Sample { count, seed } => write!(f, "sample:{count} seed={seed}"),
            Self::Single(s) => write!(f, "single:{s}"),
        }
    }
}

/// Default number of sampled starts.
pub const DEFAULT_SAMPLE_STARTS: usize = 100;
/// Default work budget, in state updates, for [`StartPolicy::All`].
pub const DEFAULT_WORK_BUDGET: f64 = 1e10;

/// `t ↦ d(t)` for `t = 0..=t_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixingProfile {
    pub kind: WalkKind,
    pub policy: StartPolicy,
    pub values: Vec<f64>,
    /// True only when every start was evolved.
    pub exact: bool,
    /// Non-backtracking profile measured on the vertex projection.
    pub projected: bool,
}

impl MixingProfile {
    pub fn t_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Largest increase `d(t+1) − d(t)`; zero or rounding noise for a valid profile.
    pub fn max_increase(&self) -> f64 {
        self.values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }
}

/// How the distance is measured at each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Measure {
    Native,
    /// Non-backtracking walk viewed through `(x, y) ↦ y`.
    Projected,
}

fn single_profile(kernel: Kernel<'_>, start: usize, t_max: usize, measure: Measure) -> Result<Vec<f64>> {
    let mu = ProbVector::point_mass(kernel.space(), start)?;
    let mut evolution = Evolution::new(kernel, mu)?;
    let distance = |values: &[f64]| match (measure, kernel) {
        (Measure::Projected, Kernel::Nbrw(es)) => tv_to_uniform(&project_values(es, values)),
        _ => tv_to_uniform(values),
    };
    let mut out = Vec::with_capacity(t_max + 1);
    out.push(distance(evolution.current()));
    for _ in 0..t_max {
        out.push(distance(evolution.advance()?));
    }
    Ok(out)
}

/// Profile of a single start against the uniform stationary law.
pub fn distance_profile(kernel: Kernel<'_>, start: usize, t_max: usize) -> Result<MixingProfile> {
    Ok(MixingProfile {
        kind: kernel.kind(),
        policy: StartPolicy::Single(start),
        values: single_profile(kernel, start, t_max, Measure::Native)?,
        exact: kernel.space().size() == 1,
        projected: false,
    })
}

/// Starts selected by a policy, in increasing order.
pub fn select_starts(space: StateSpace, policy: StartPolicy) -> Result<Vec<usize>> {
    let size = space.size();
    match policy {
        StartPolicy::All => Ok((0..size).collect()),
        StartPolicy::Single(s) if s < size => Ok(vec![s]),
        StartPolicy::Single(s) => Err(Error::IndexOutOfRange { index: s, size }),
        StartPolicy::Sample { count, seed } => {
            let mut rng = stream_rng(seed, 0);
            let mut starts = index::sample(&mut rng, size, count.min(size)).into_vec();
            starts.sort_unstable();
            Ok(starts)
        }
    }
}

/// Work in state updates for evolving `starts` distributions for `t_max` steps.
pub fn profile_work(kernel: Kernel<'_>, starts: usize, t_max: usize) -> f64 {
    let per_state = match kernel {
        Kernel::Nbrw(es) => (es.d() - 1) as f64,
        _ => kernel.graph().d() as f64,
    };
    starts as f64 * kernel.space().size() as f64 * per_state * t_max as f64
}

fn worst_case(
    kernel: Kernel<'_>,
    policy: StartPolicy,
    t_max: usize,
    budget: f64,
    measure: Measure,
) -> Result<MixingProfile> {
    let starts = select_starts(kernel.space(), policy)?;
    if policy == StartPolicy::All {
        let required = profile_work(kernel, starts.len(), t_max);
        if required > budget {
            return Err(Error::BudgetExceeded { required, budget });
        }
    }
    let profiles: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&s| single_profile(kernel, s, t_max, measure))
        .collect::<Result<_>>()?;
    let mut values = vec![0.0f64; t_max + 1];
    for p in &profiles {
        for (acc, &x) in values.iter_mut().zip(p) {
            *acc = acc.max(x);
        }
    }
    Ok(MixingProfile {
        kind: kernel.kind(),
        policy,
        values,
        exact: matches!(policy, StartPolicy::All),
        projected: measure == Measure::Projected,
    })
}

/// Pointwise maximum of single-start profiles over the starts chosen by
/// `policy`. [`StartPolicy::All`] is refused when its work exceeds `budget`.
pub fn worst_case_profile(kernel: Kernel<'_>, policy: StartPolicy, t_max: usize, budget: f64) -> Result<MixingProfile> {
    worst_case(kernel, policy, t_max, budget, Measure::Native)
}

/// Worst case over directed-edge starts of the non-backtracking walk, with
/// the distance taken on the vertex the walk currently sits at.
pub fn projected_nbrw_profile(
    es: &DirectedEdgeSpace<'_>,
    policy: StartPolicy,
    t_max: usize,
    budget: f64,
) -> Result<MixingProfile> {
    worst_case(Kernel::Nbrw(es), policy, t_max, budget, Measure::Projected)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixingTime {
    Reached(usize),
    /// Level not reached by `t_max`.
    NotReached(usize),
}

impl MixingTime {
    pub fn reached(self) -> Option<usize> {
        match self {
            Self::Reached(t) => Some(t),
            Self::NotReached(_) => None,
        }
    }
}

impl fmt::Display for MixingTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Reached(t) => write!(f, "{t}"),
            Self::NotReached(t) => write!(f, ">{t}"),
        }
    }
}

/// `min{t : d(t) < ε}`; the inequality is strict.
pub fn mixing_time(profile: &MixingProfile, epsilon: f64) -> MixingTime {
    match profile.values.iter().position(|&x| x < epsilon) {
        Some(t) => MixingTime::Reached(t),
        None => MixingTime::NotReached(profile.t_max()),
    }
}

/// `t_mix(ε) − t_mix(1−ε)` with `ε` folded into `(0, ½]`.
pub fn profile_width(profile: &MixingProfile, epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::BadEpsilon(epsilon));
    }
    let small = epsilon.min(1.0 - epsilon);
    let late = mixing_time(profile, small).reached().ok_or(Error::NotReached(profile.t_max()))?;
    let early = mixing_time(profile, 1.0 - small).reached().ok_or(Error::NotReached(profile.t_max()))?;
    Ok(late.saturating_sub(early))
}

/// `E_y |C_m(x,y)/μ − 1|` over all `d·n` directed edges `y`, where
/// `μ = (d−1)^m / (dn)`. Exact in integer arithmetic while counts are exact.
pub fn poissonization_stat(es: &DirectedEdgeSpace<'_>, x: usize, m: usize) -> Result<f64> {
    let size = es.len();
    match trajectory_count_vector(es, x, m)? {
        TrajectoryCounts::Exact(counts) => {
            let total = (es.d() as u128 - 1).pow(m as u32);
            let deviation: u128 = counts
                .iter()
                .map(|&c| (c as u128 * size as u128).abs_diff(total))
                .sum();
            Ok(deviation as f64 / (total as f64 * size as f64))
        }
        TrajectoryCounts::Approximate(counts) => {
            let mu = ((es.d() - 1) as f64).powi(m as i32) / size as f64;
            Ok(counts.iter().map(|&c| (c / mu - 1.0).abs()).sum::<f64>() / size as f64)
        }
    }
}

/// `Σ_y C_m(x,y) = dn·μ`, checked in integer arithmetic.
pub fn poissonization_normalized(es: &DirectedEdgeSpace<'_>, x: usize, m: usize) -> Result<bool> {
    match trajectory_count_vector(es, x, m)? {
        TrajectoryCounts::Exact(counts) => {
            let sum: u128 = counts.iter().map(|&c| c as u128).sum();
            Ok(sum == (es.d() as u128 - 1).pow(m as u32))
        }
        TrajectoryCounts::Approximate(_) => Err(Error::CountOverflow(m)),
    }
}

/// Bound `2ε + 5/ln ln n` on the Poissonization statistic at directed roots.
pub fn poissonization_bound(n: usize, epsilon: f64) -> f64 {
    2.0 * epsilon + 5.0 / (n as f64).ln().ln()
}

/// Mixture weights over non-backtracking lengths: `h_t` for the simple walk,
/// `Σ_j C(t,j) 2^{−t} h_j` for the lazy walk.
fn duality_weights(d: usize, t: usize, lazy: bool) -> Vec<f64> {
    if !lazy {
        return tree_height_distribution(d, t);
    }
    let mut weights = vec![0.0; t + 1];
    for (j, b) in binomial_half(t).into_iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        for (k, h) in tree_height_distribution(d, j).into_iter().enumerate() {
            weights[k] += b * h;
        }
    }
    weights
}

/// `C(t, j) 2^{−t}` for `j = 0..=t`.
fn binomial_half(t: usize) -> Vec<f64> {
    let mut row = vec![1.0f64];
    for _ in 0..t {
        let mut next = vec![0.0; row.len() + 1];
        for (j, &x) in row.iter().enumerate() {
            next[j] += 0.5 * x;
            next[j + 1] += 0.5 * x;
        }
        row = next;
    }
    row
}

fn duality(g: &RegularGraph, u: usize, t: usize, lazy: bool) -> Result<f64> {
    let n = g.n();
    if u >= n {
        return Err(Error::IndexOutOfRange { index: u, size: n });
    }
    let walk = if lazy { Kernel::Lazy(g) } else { Kernel::Srw(g) };
    let direct = walk.evolve(&ProbVector::point_mass(StateSpace::Vertices(n), u)?, t)?;

    let weights = duality_weights(g.d(), t, lazy);
    let mut mixture = vec![0.0; n];
    mixture[u] = weights[0];
    if t >= 1 {
        let es = DirectedEdgeSpace::new(g);
        let mut start = vec![0.0; es.len()];
        for e in es.out_edges(u) {
            start[e] = 1.0 / g.d() as f64;
        }
        let mut evolution = Evolution::new(Kernel::Nbrw(&es), ProbVector::new(StateSpace::DirectedEdges(es.len()), start)?)?;
        for (k, &w) in weights.iter().enumerate().skip(1) {
            if k > 1 {
                evolution.advance()?;
            }
            if w != 0.0 {
                for (acc, r) in mixture.iter_mut().zip(project_values(&es, evolution.current())) {
                    *acc += w * r;
                }
            }
        }
    }
    Ok(direct
        .values()
        .iter()
        .zip(&mixture)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Largest pointwise gap between the simple walk from `u` at time `t` and the
/// mixture `Σ_k h_t(k)·ρ_k`, where `ρ_k` is the vertex law of a uniformly
/// started `k`-step non-backtracking path from `u` and `h_t` the tree-height
/// law. The identity is exact on every regular graph.
pub fn duality_residual(g: &RegularGraph, u: usize, t: usize) -> Result<f64> {
    duality(g, u, t, false)
}

/// The same identity for the lazy walk, whose height law is the binomial
/// mixture of the simple walk's.
pub fn lazy_duality_residual(g: &RegularGraph, u: usize, t: usize) -> Result<f64> {
    duality(g, u, t, true)
}

/// Second-largest absolute eigenvalue of the simple-walk kernel, by power
/// iteration on `P²` restricted to vectors orthogonal to the constants.
/// Three random restarts; the largest converged estimate wins.
pub fn second_eigenvalue_estimate(g: &RegularGraph, max_iters: usize, tol: f64) -> Result<f64> {
    if !validate(g).is_connected {
        return Err(Error::NotConnected);
    }
    let n = g.n();
    let kernel = Kernel::Srw(g);
    let center = |v: &mut [f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();

    let mut best = 0.0f64;
    for restart in 0..3 {
        let mut rng = stream_rng(0x5eed, restart);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
        center(&mut v);
        let scale = norm(&v);
        if scale == 0.0 {
            continue;
        }
        v.iter_mut().for_each(|x| *x /= scale);
        let mut once = vec![0.0; n];
        let mut twice = vec![0.0; n];
        let mut previous = f64::INFINITY;
        let mut converged = false;
        for _ in 0..max_iters {
            kernel.step_into(&v, &mut once);
            kernel.step_into(&once, &mut twice);
            center(&mut twice);
            let rayleigh: f64 = v.iter().zip(&twice).map(|(a, b)| a * b).sum();
            let estimate = rayleigh.max(0.0).sqrt();
            let size = norm(&twice);
            if size == 0.0 {
                previous = 0.0;
                converged = true;
                break;
            }
            v.iter_mut().zip(&twice).for_each(|(x, y)| *x = y / size);
            if (estimate - previous).abs() < tol {
                previous = estimate;
                converged = true;
                break;
            }
            previous = estimate;
        }
        if !converged {
            return Err(Error::MaxItersExceeded(max_iters));
        }
        best = best.max(previous);
    }
    Ok(best)
}

/// Decimal rendering with 17 significant digits, trailing zeros removed.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if exp < 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
        out.push_str(&digits);
    } else {
        let int_len = exp as usize + 1;
        if int_len >= digits.len() {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            out.push('.');
            out.push_str(&digits[int_len..]);
        }
    }
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

/// Write a profile as CSV: `#`-prefixed `key=value` metadata lines, then the
/// header `t,tv` and one row per step.
pub fn write_profile_csv<W: Write>(out: &mut W, profile: &MixingProfile, metadata: &[(String, String)]) -> io::Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "# walk={}", profile.kind)?;
    writeln!(out, "# policy={}", profile.policy)?;
    writeln!(out, "# exactness={}", if profile.exact { "exact" } else { "lower_bound" })?;
    if profile.projected {
        writeln!(out, "# measure=vertex_projection")?;
    }
    writeln!(out, "t,tv")?;
    for (t, &x) in profile.values.iter().enumerate() {
        writeln!(out, "{t},{}", format_sig17(x))?;
    }
    Ok(())
}

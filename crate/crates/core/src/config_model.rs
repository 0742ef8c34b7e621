//! Configuration-model sampling of random d-regular graphs.
//!
//! Vertex `v` owns the points `v·d .. (v+1)·d`. A uniform perfect matching of
//! the `d·n` points collapses to a d-regular multigraph; conditioned on being
//! simple it is uniform over simple d-regular graphs on `n` vertices.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::RegularGraph;
use crate::rng::{stream_rng, StreamRng};

/// A perfect matching on the `d·n` points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pairing {
    n: usize,
    d: usize,
    matches: Vec<u32>,
}

impl Pairing {
    /// Wrap an explicit matching, checking it is a fixed-point-free involution.
    pub fn from_matches(n: usize, d: usize, matches: Vec<u32>) -> Result<Self> {
        if matches.len() != n * d {
            return Err(Error::InvalidPairing(format!(
                "{} entries for {} points",
                matches.len(),
                n * d
            )));
        }
        for (p, &q) in matches.iter().enumerate() {
            let q = q as usize;
            if q >= matches.len() || q == p || matches[q] as usize != p {
                return Err(Error::InvalidPairing(format!("point {p} is not matched symmetrically")));
            }
        }
        Ok(Self { n, d, matches })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn partner(&self, p: usize) -> usize {
        self.matches[p] as usize
    }

    pub fn matches(&self) -> &[u32] {
        &self.matches
    }

    /// Vertex owning point `p`.
    pub fn vertex_of(&self, p: usize) -> usize {
        p / self.d
    }
}

fn check_parameters(n: usize, d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::DegreeTooSmall(d));
    }
    if n == 0 || (n * d) % 2 == 1 {
        return Err(Error::OddProduct { n, d });
    }
    Ok(())
}

/// Uniform perfect matching: Fisher–Yates shuffle of the points, consumed in
/// consecutive pairs.
pub fn sample_pairing_with(n: usize, d: usize, rng: &mut StreamRng) -> Result<Pairing> {
    check_parameters(n, d)?;
    let mut points: Vec<u32> = (0..(n * d) as u32).collect();
    points.shuffle(rng);
    let mut matches = vec![0u32; n * d];
    for pair in points.chunks_exact(2) {
        matches[pair[0] as usize] = pair[1];
        matches[pair[1] as usize] = pair[0];
    }
    Ok(Pairing { n, d, matches })
}

pub fn sample_pairing(n: usize, d: usize, seed: u64) -> Result<Pairing> {
    sample_pairing_with(n, d, &mut stream_rng(seed, 0))
}

/// A d-regular multigraph; loops contribute 2 to the degree of their vertex.
#[derive(Clone, Debug)]
pub struct MultiGraph {
    pub n: usize,
    pub d: usize,
    /// One entry per matched pair, ordered by the smaller point.
    pub edges: Vec<(usize, usize)>,
    pub loop_count: usize,
    pub multi_count: usize,
}

impl MultiGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b)| (a == v) as usize + (b == v) as usize)
            .sum()
    }
}

pub fn collapse_to_multigraph(p: &Pairing) -> MultiGraph {
    let edges: Vec<(usize, usize)> = (0..p.matches.len())
        .filter(|&a| a < p.partner(a))
        .map(|a| (p.vertex_of(a), p.vertex_of(p.partner(a))))
        .collect();
    let (loop_count, multi_count) = count_defects(&edges);
    MultiGraph {
        n: p.n,
        d: p.d,
        edges,
        loop_count,
        multi_count,
    }
}

fn count_defects(edges: &[(usize, usize)]) -> (usize, usize) {
    let mut loops = 0;
    let mut seen: HashMap<(usize, usize), usize> = HashMap::with_capacity(edges.len());
    for &(u, v) in edges {
        if u == v {
            loops += 1;
        } else {
            *seen.entry((u.min(v), u.max(v))).or_default() += 1;
        }
    }
    let multi = seen.values().map(|&c| c - 1).sum();
    (loops, multi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Classification {
    pub simple: bool,
    pub loop_count: usize,
    pub multi_count: usize,
}

pub fn classify(m: &MultiGraph) -> Classification {
    let (loop_count, multi_count) = count_defects(&m.edges);
    Classification {
        simple: loop_count == 0 && multi_count == 0,
        loop_count,
        multi_count,
    }
}

/// Whether a sampled graph is exactly uniform over simple d-regular graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Uniformity {
    /// Rejection sampling from the configuration model.
    Exact,
    /// Configuration model repaired by random switchings; close to, but not
    /// exactly, uniform.
    Approximate { switchings: u64 },
}

#[derive(Clone, Debug)]
pub struct SampledGraph {
    pub graph: RegularGraph,
    pub attempts: u64,
    pub uniformity: Uniformity,
}

/// Simplicity test straight from the matching, without building the multigraph.
fn simple_blocks(p: &Pairing) -> bool {
    let d = p.d;
    for v in 0..p.n {
        for i in 0..d {
            let w = p.vertex_of(p.partner(v * d + i));
            if w == v {
                return false;
            }
            for j in 0..i {
                if p.vertex_of(p.partner(v * d + j)) == w {
                    return false;
                }
            }
        }
    }
    true
}

fn to_regular(m: &MultiGraph) -> Result<RegularGraph> {
    RegularGraph::from_edges(m.n, m.d, &m.edges)
}

/// Uniform simple d-regular graph by rejection: resample pairings until the
/// collapsed multigraph is simple. Attempt `a` (0-based) draws from stream `a`.
pub fn sample_simple_regular(n: usize, d: usize, seed: u64, max_attempts: u64) -> Result<SampledGraph> {
    check_parameters(n, d)?;
    for attempt in 0..max_attempts {
        let pairing = sample_pairing_with(n, d, &mut stream_rng(seed, attempt))?;
        if simple_blocks(&pairing) {
            let graph = to_regular(&collapse_to_multigraph(&pairing))?;
            return Ok(SampledGraph {
                graph,
                attempts: attempt + 1,
                uniformity: Uniformity::Exact,
            });
        }
    }
    Err(Error::AttemptsExhausted { attempts: max_attempts })
}

/// Approximate sampler for degrees where rejection is hopeless: collapse one
/// pairing, then remove every loop and repeated edge by switching it with a
/// uniformly random edge, `{u,v},{x,y} → {u,x},{v,y}` (orientation chosen at
/// random), accepting only switchings that create no new defect.
pub fn sample_regular_switching(n: usize, d: usize, seed: u64) -> Result<SampledGraph> {
    check_parameters(n, d)?;
    if d >= n {
        return Err(Error::BadDegree { n, d });
    }
    let mut rng = stream_rng(seed, 0);
    let pairing = sample_pairing_with(n, d, &mut rng)?;
    let mut edges = collapse_to_multigraph(&pairing).edges;

    let key = |u: usize, v: usize| (u.min(v), u.max(v));
    let mut count: HashMap<(usize, usize), u32> = HashMap::with_capacity(edges.len());
    for &(u, v) in &edges {
        *count.entry(key(u, v)).or_default() += 1;
    }
    let is_bad = |count: &HashMap<(usize, usize), u32>, (u, v): (usize, usize)| {
        u == v || count.get(&key(u, v)).copied().unwrap_or(0) > 1
    };

    let mut switchings = 0u64;
    let budget = 1000 * edges.len() as u64 + 10_000;
    loop {
        let bad: Vec<usize> = (0..edges.len()).filter(|&i| is_bad(&count, edges[i])).collect();
        if bad.is_empty() {
            break;
        }
        for i in bad {
            while is_bad(&count, edges[i]) {
                switchings += 1;
                if switchings > budget {
                    return Err(Error::AttemptsExhausted { attempts: switchings });
                }
                let j = rng.gen_range(0..edges.len());
                if j == i {
                    continue;
                }
                let (u, v) = edges[i];
                let (x, y) = if rng.gen::<bool>() { edges[j] } else { (edges[j].1, edges[j].0) };
                let (a, b) = ((u, x), (v, y));
                if a.0 == a.1 || b.0 == b.1 || key(a.0, a.1) == key(b.0, b.1) {
                    continue;
                }
                if count.contains_key(&key(a.0, a.1)) || count.contains_key(&key(b.0, b.1)) {
                    continue;
                }
                for old in [(u, v), edges[j]] {
                    let k = key(old.0, old.1);
                    let c = count.get_mut(&k).expect("edge present");
                    *c -= 1;
                    if *c == 0 {
                        count.remove(&k);
                    }
                }
                *count.entry(key(a.0, a.1)).or_default() += 1;
                *count.entry(key(b.0, b.1)).or_default() += 1;
                edges[i] = a;
                edges[j] = b;
            }
        }
    }

    let graph = RegularGraph::from_edges(n, d, &edges)?;
    Ok(SampledGraph {
        graph,
        attempts: 1,
        uniformity: Uniformity::Approximate { switchings },
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SimpleEstimate {
    pub fraction: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Fraction of configuration-model samples that are simple. Trial `i` uses
/// stream `i` of `seed`.
pub fn estimate_simple_probability(n: usize, d: usize, trials: u64, seed: u64) -> Result<SimpleEstimate> {
    if trials == 0 {
        return Err(Error::InvalidTrials);
    }
    check_parameters(n, d)?;
    let hits: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let p = sample_pairing_with(n, d, &mut stream_rng(seed, i)).expect("checked parameters");
            simple_blocks(&p) as u64
        })
        .sum();
    let fraction = hits as f64 / trials as f64;
    Ok(SimpleEstimate {
        fraction,
        std_error: (fraction * (1.0 - fraction) / trials as f64).sqrt(),
        trials,
    })
}

/// Limiting probability that the configuration model is simple, `exp((1 − d²)/4)`.
pub fn limiting_simple_probability(d: usize) -> f64 {
    let d = d as f64;
    ((1.0 - d * d) / 4.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{fixtures, validate};

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(sample_pairing(3, 3, 1), Err(Error::OddProduct { .. })));
        assert!(matches!(sample_pairing(4, 2, 1), Err(Error::DegreeTooSmall(2))));
    }

    #[test]
    fn pairing_is_deterministic_per_seed() {
        assert_eq!(sample_pairing(4, 3, 7).unwrap(), sample_pairing(4, 3, 7).unwrap());
        assert_ne!(sample_pairing(50, 3, 7).unwrap(), sample_pairing(50, 3, 8).unwrap());
    }

    #[test]
    fn matching_is_an_involution() {
        let p = sample_pairing(101, 4, 3).unwrap();
        for q in 0..p.matches().len() {
            assert_ne!(p.partner(q), q);
            assert_eq!(p.partner(p.partner(q)), q);
        }
        assert!(Pairing::from_matches(2, 3, vec![1, 0, 3, 2, 5, 4]).is_ok());
        assert!(Pairing::from_matches(2, 3, vec![1, 0, 2, 3, 5, 4]).is_err());
    }

    #[test]
    fn triple_edge_collapse() {
        // all of vertex 0's points matched to vertex 1's
        let p = Pairing::from_matches(2, 3, vec![3, 4, 5, 0, 1, 2]).unwrap();
        let m = collapse_to_multigraph(&p);
        assert_eq!(m.edges.len(), 3);
        assert_eq!((m.loop_count, m.multi_count), (0, 2));
        let c = classify(&m);
        assert!(!c.simple);
        assert_eq!(c.multi_count, 2);
    }

    #[test]
    fn same_vertex_pair_is_a_loop() {
        let p = Pairing::from_matches(2, 3, vec![1, 0, 3, 2, 5, 4]).unwrap();
        let m = collapse_to_multigraph(&p);
        assert!(m.loop_count >= 1);
        assert!(!classify(&m).simple);
        for v in 0..2 {
            assert_eq!(m.degree(v), 3);
        }
    }

    #[test]
    fn k4_is_simple() {
        let m = MultiGraph {
            n: 4,
            d: 3,
            edges: vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
            loop_count: 0,
            multi_count: 0,
        };
        assert_eq!(
            classify(&m),
            Classification { simple: true, loop_count: 0, multi_count: 0 }
        );
    }

    #[test]
    fn no_simple_cubic_graph_on_two_vertices() {
        assert!(matches!(
            sample_simple_regular(2, 3, 1, 10_000),
            Err(Error::AttemptsExhausted { attempts: 10_000 })
        ));
        let e = estimate_simple_probability(2, 3, 100, 1).unwrap();
        assert_eq!(e.fraction, 0.0);
    }

    #[test]
    fn only_simple_outcome_on_four_vertices_is_k4() {
        for seed in 0..20 {
            let s = sample_simple_regular(4, 3, seed, 10_000).unwrap();
            assert_eq!(s.graph, fixtures::k4());
        }
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(estimate_simple_probability(10, 3, 0, 1), Err(Error::InvalidTrials)));
    }

    #[test]
    fn collapse_conserves_degree() {
        for seed in 0..10 {
            let m = collapse_to_multigraph(&sample_pairing(12, 5, seed).unwrap());
            assert_eq!(m.edges.len(), 30);
            for v in 0..12 {
                assert_eq!(m.degree(v), 5);
            }
        }
    }

    #[test]
    fn switching_sampler_yields_simple_regular_graphs() {
        let s = sample_regular_switching(200, 12, 5).unwrap();
        let r = validate(&s.graph);
        assert!(r.is_regular && r.is_simple);
        assert!(matches!(s.uniformity, Uniformity::Approximate { .. }));
        let again = sample_regular_switching(200, 12, 5).unwrap();
        assert_eq!(again.graph.adjacency(), s.graph.adjacency());
    }
}

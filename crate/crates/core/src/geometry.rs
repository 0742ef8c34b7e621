//! Local geometry around vertices and directed edges: BFS balls, tree excess,
//! K-roots, unique-path boundaries and path/trajectory counts.

use crate::error::{Error, Result};
use crate::graph::{DirectedEdgeSpace, RegularGraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Center {
    Vertex(usize),
    Edge(usize),
}

/// Layers `∂B_0, …, ∂B_t` of a ball. Members are vertex ids for a vertex
/// center and directed-edge ids for an edge center.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallLayers {
    pub center: Center,
    pub radius: usize,
    pub layers: Vec<Vec<u32>>,
}

impl BallLayers {
    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    /// `|B_t|`.
    pub fn total(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn boundary(&self) -> &[u32] {
        self.layers.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.layers.iter().flatten().map(|&x| x as usize)
    }
}

/// Reusable scratch space for many ball queries on one graph. Membership is
/// tracked with generation stamps so each query costs only the ball size.
pub struct Explorer {
    stamp: Vec<u32>,
    depth: Vec<u32>,
    generation: u32,
    vertex_stamp: Vec<u32>,
    vertex_generation: u32,
}

impl Explorer {
    pub fn new(g: &RegularGraph) -> Self {
        let size = g.num_directed_edges().max(g.n());
        Self {
            stamp: vec![0; size],
            depth: vec![0; size],
            generation: 0,
            vertex_stamp: vec![0; g.n()],
            vertex_generation: 0,
        }
    }

    fn next_generation(&mut self) -> u32 {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        self.generation
    }

    fn next_vertex_generation(&mut self) -> u32 {
        self.vertex_generation = self.vertex_generation.wrapping_add(1);
        if self.vertex_generation == 0 {
            self.vertex_stamp.fill(0);
            self.vertex_generation = 1;
        }
        self.vertex_generation
    }

    pub fn ball(&mut self, g: &RegularGraph, u: usize, t: usize) -> BallLayers {
        let gen = self.next_generation();
        self.stamp[u] = gen;
        self.depth[u] = 0;
        let mut layers = vec![vec![u as u32]];
        for i in 0..t {
            let mut next = Vec::new();
            for &v in &layers[i] {
                for &w in g.neighbors(v as usize) {
                    let w = w as usize;
                    if self.stamp[w] != gen {
                        self.stamp[w] = gen;
                        self.depth[w] = (i + 1) as u32;
                        next.push(w as u32);
                    }
                }
            }
            layers.push(next);
        }
        BallLayers {
            center: Center::Vertex(u),
            radius: t,
            layers,
        }
    }

    pub fn directed_ball(&mut self, es: &DirectedEdgeSpace<'_>, x: usize, t: usize) -> BallLayers {
        let gen = self.next_generation();
        self.stamp[x] = gen;
        let mut layers = vec![vec![x as u32]];
        for i in 0..t {
            let mut next = Vec::new();
            for &e in &layers[i] {
                for f in es.successors(e as usize) {
                    if self.stamp[f] != gen {
                        self.stamp[f] = gen;
                        next.push(f as u32);
                    }
                }
            }
            layers.push(next);
        }
        BallLayers {
            center: Center::Edge(x),
            radius: t,
            layers,
        }
    }

    /// Induced edges on `vertices` minus `|vertices| − 1`.
    fn excess_of(&mut self, g: &RegularGraph, vertices: &[u32]) -> usize {
        let gen = self.next_vertex_generation();
        for &v in vertices {
            self.vertex_stamp[v as usize] = gen;
        }
        let twice_edges: usize = vertices
            .iter()
            .map(|&v| {
                g.neighbors(v as usize)
                    .iter()
                    .filter(|&&w| self.vertex_stamp[w as usize] == gen)
                    .count()
            })
            .sum();
        (twice_edges / 2 + 1).saturating_sub(vertices.len())
    }

    pub fn tree_excess(&mut self, g: &RegularGraph, u: usize, t: usize) -> usize {
        let ball = self.ball(g, u, t);
        let vertices: Vec<u32> = ball.layers.concat();
        self.excess_of(g, &vertices)
    }

    /// Tree excess of the undirected graph induced on the endpoints of the
    /// directed ball `B_t(x)`.
    pub fn directed_tree_excess(&mut self, es: &DirectedEdgeSpace<'_>, x: usize, t: usize) -> usize {
        let ball = self.directed_ball(es, x, t);
        let gen = self.next_vertex_generation();
        let mut vertices = Vec::with_capacity(ball.total() + 1);
        for e in ball.members() {
            for v in [es.tail(e), es.head(e)] {
                if self.vertex_stamp[v] != gen {
                    self.vertex_stamp[v] = gen;
                    vertices.push(v as u32);
                }
            }
        }
        self.excess_of(es.graph(), &vertices)
    }

    /// Layer sizes of `B_t(u)` when `u` is a K-root, else `None`; shares one
    /// BFS between the root test and the boundary sizes.
    pub fn root_layers(&mut self, g: &RegularGraph, u: usize, k: usize, t: usize) -> Option<Vec<usize>> {
        if self.tree_excess(g, u, k) != 0 {
            return None;
        }
        Some(self.ball(g, u, t.max(k)).sizes())
    }
}

pub fn ball_layers(g: &RegularGraph, u: usize, t: usize) -> BallLayers {
    Explorer::new(g).ball(g, u, t)
}

pub fn directed_ball_layers(es: &DirectedEdgeSpace<'_>, x: usize, t: usize) -> BallLayers {
    Explorer::new(es.graph()).directed_ball(es, x, t)
}

pub fn tree_excess(g: &RegularGraph, u: usize, t: usize) -> usize {
    Explorer::new(g).tree_excess(g, u, t)
}

pub fn directed_tree_excess(es: &DirectedEdgeSpace<'_>, x: usize, t: usize) -> usize {
    Explorer::new(es.graph()).directed_tree_excess(es, x, t)
}

/// `B_K(u)` induces a tree.
pub fn is_k_root(g: &RegularGraph, u: usize, k: usize) -> bool {
    tree_excess(g, u, k) == 0
}

/// `B_K(x)` (directed) induces a tree.
pub fn is_directed_k_root(es: &DirectedEdgeSpace<'_>, x: usize, k: usize) -> bool {
    directed_tree_excess(es, x, k) == 0
}

/// Vertices of `∂B_t(u)` joined to `u` by exactly one path of length `t`.
///
/// A length-`t` path ending at distance `t` moves strictly outward, so the
/// path counts obey `c(v, i+1) = Σ c(w, i)` over neighbors `w ∈ ∂B_i` of `v`.
pub fn boundary_star(g: &RegularGraph, u: usize, t: usize) -> Vec<u32> {
    let mut explorer = Explorer::new(g);
    let ball = explorer.ball(g, u, t);
    let mut count = vec![0u64; g.n()];
    count[u] = 1;
    for i in 1..=t {
        for &v in &ball.layers[i] {
            let v = v as usize;
            count[v] = g
                .neighbors(v)
                .iter()
                .filter(|&&w| explorer.stamp[w as usize] == explorer.generation && explorer.depth[w as usize] as usize == i - 1)
                .map(|&w| count[w as usize])
                .fold(0u64, u64::saturating_add);
        }
    }
    ball.layers[t]
        .iter()
        .copied()
        .filter(|&v| count[v as usize] == 1)
        .collect()
}

/// Default bound on partial-path expansions for [`count_simple_paths`].
pub const DEFAULT_PATH_CAP: u64 = 10_000_000;

/// Number of simple paths of exactly `k` edges from `u` to `v`, by exhaustive
/// depth-first search.
pub fn count_simple_paths(g: &RegularGraph, u: usize, v: usize, k: usize, cap: u64) -> Result<u64> {
    struct Search<'a> {
        g: &'a RegularGraph,
        target: usize,
        k: usize,
        on_path: Vec<bool>,
        dist_to_target: Vec<u32>,
        expansions: u64,
        cap: u64,
        found: u64,
    }

    impl Search<'_> {
        fn go(&mut self, x: usize, len: usize) -> Result<()> {
            if len == self.k {
                if x == self.target {
                    self.found += 1;
                }
                return Ok(());
            }
            self.expansions += 1;
            if self.expansions > self.cap {
                return Err(Error::CapExceeded(self.cap));
            }
            for i in 0..self.g.d() {
                let y = self.g.neighbors(x)[i] as usize;
                // the target may only be reached as the final vertex
                if self.on_path[y] || (y == self.target && len + 1 != self.k) {
                    continue;
                }
                if self.dist_to_target[y] as usize > self.k - len - 1 {
                    continue;
                }
                self.on_path[y] = true;
                self.go(y, len + 1)?;
                self.on_path[y] = false;
            }
            Ok(())
        }
    }

    if k == 0 || u == v {
        return Ok(((k == 0) && u == v) as u64);
    }
    let mut search = Search {
        g,
        target: v,
        k,
        on_path: vec![false; g.n()],
        dist_to_target: g.bfs_distances(v),
        expansions: 0,
        cap,
        found: 0,
    };
    search.on_path[u] = true;
    search.go(u, 0)?;
    Ok(search.found)
}

/// Counts `C_m(x, ·)` of non-backtracking trajectories of exactly `m` steps.
#[derive(Clone, Debug, PartialEq)]
pub enum TrajectoryCounts {
    Exact(Vec<u64>),
    /// Used once `(d−1)^m ≥ 2^62`; relative accuracy only.
    Approximate(Vec<f64>),
}

impl TrajectoryCounts {
    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            Self::Exact(c) => c.iter().map(|&x| x as f64).collect(),
            Self::Approximate(c) => c.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Self::Exact(_))
    }
}

pub fn trajectory_count_vector(es: &DirectedEdgeSpace<'_>, x: usize, m: usize) -> Result<TrajectoryCounts> {
    if x >= es.len() {
        return Err(Error::IndexOutOfRange { index: x, size: es.len() });
    }
    let branching = (es.d() - 1) as f64;
    if branching.powi(m as i32) >= f64::MAX / es.len() as f64 {
        return Err(Error::CountOverflow(m));
    }
    let exact = (es.d() as u128 - 1)
        .checked_pow(m as u32)
        .is_some_and(|p| p < 1u128 << 62);
    if exact {
        Ok(TrajectoryCounts::Exact(propagate(es, x, m, 0u64, 1u64, |a, b| a + b)))
    } else {
        Ok(TrajectoryCounts::Approximate(propagate(es, x, m, 0.0, 1.0, |a, b| a + b)))
    }
}

fn propagate<T: Copy>(
    es: &DirectedEdgeSpace<'_>,
    x: usize,
    m: usize,
    zero: T,
    one: T,
    add: impl Fn(T, T) -> T,
) -> Vec<T> {
    let mut cur = vec![zero; es.len()];
    let mut next = vec![zero; es.len()];
    cur[x] = one;
    for _ in 0..m {
        for (f, slot) in next.iter_mut().enumerate() {
            *slot = es.predecessors(f).fold(zero, |acc, e| add(acc, cur[e]));
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    /// Brute-force BFS on an explicit adjacency-set representation.
    fn naive_layer_sizes(g: &RegularGraph, u: usize, t: usize) -> Vec<usize> {
        let dist = g.bfs_distances(u);
        (0..=t).map(|i| dist.iter().filter(|&&x| x as usize == i).count()).collect()
    }

    #[test]
    fn vertex_ball_sizes() {
        assert_eq!(ball_layers(&k4(), 0, 1).sizes(), vec![1, 3]);
        for u in 0..10 {
            assert_eq!(ball_layers(&petersen(), u, 2).sizes(), vec![1, 3, 6]);
        }
        for u in 0..6 {
            assert_eq!(ball_layers(&k33(), u, 2).sizes(), vec![1, 3, 2]);
        }
        let p = petersen();
        assert_eq!(ball_layers(&p, 3, 3).sizes(), naive_layer_sizes(&p, 3, 3));
    }

    #[test]
    fn directed_ball_sizes() {
        let g = k4();
        let es = DirectedEdgeSpace::new(&g);
        let x = es.edge_id(0, 1).unwrap();
        let ball = directed_ball_layers(&es, x, 1);
        assert_eq!(ball.layers[0], vec![x as u32]);
        let mut heads: Vec<(usize, usize)> = ball.layers[1]
            .iter()
            .map(|&e| (es.tail(e as usize), es.head(e as usize)))
            .collect();
        heads.sort_unstable();
        assert_eq!(heads, vec![(1, 2), (1, 3)]);

        let p = petersen();
        let es = DirectedEdgeSpace::new(&p);
        for x in 0..es.len() {
            assert_eq!(directed_ball_layers(&es, x, 2).sizes(), vec![1, 2, 4]);
            for (i, s) in directed_ball_layers(&es, x, 4).sizes().into_iter().enumerate() {
                assert!(s <= 2usize.pow(i as u32));
            }
        }
    }

    #[test]
    fn tree_excess_values() {
        assert_eq!(tree_excess(&k4(), 0, 1), 3);
        for u in 0..10 {
            assert_eq!(tree_excess(&petersen(), u, 1), 0);
            assert_eq!(tree_excess(&petersen(), u, 2), 6);
        }
        for u in 0..6 {
            assert_eq!(tree_excess(&k33(), u, 2), 4);
        }
        let g = k4();
        let es = DirectedEdgeSpace::new(&g);
        assert_eq!(directed_tree_excess(&es, 0, 0), 0);
        assert_eq!(directed_tree_excess(&es, 0, 1), 3);
    }

    #[test]
    fn k_roots() {
        let p = petersen();
        let es = DirectedEdgeSpace::new(&p);
        assert!((0..10).all(|u| is_k_root(&p, u, 1)));
        assert!(!is_k_root(&p, 0, 2));
        assert!((0..4).all(|u| !is_k_root(&k4(), u, 1)));
        assert!(is_k_root(&k4(), 2, 0));
        assert!(is_directed_k_root(&es, 5, 0));
        assert!(is_directed_k_root(&es, 5, 1));
        assert_eq!(directed_tree_excess(&es, 5, 2), 2);
    }

    #[test]
    fn tree_excess_is_monotone_in_radius() {
        let p = petersen();
        let g = k33();
        for graph in [&p, &g] {
            for u in 0..graph.n() {
                let tx: Vec<usize> = (0..5).map(|t| tree_excess(graph, u, t)).collect();
                assert!(tx.windows(2).all(|w| w[0] <= w[1]), "{tx:?}");
            }
        }
    }

    #[test]
    fn boundary_star_values() {
        assert_eq!(boundary_star(&k4(), 0, 1), vec![1, 2, 3]);
        let p = petersen();
        let ball = ball_layers(&p, 4, 2);
        assert_eq!(boundary_star(&p, 4, 2), ball.layers[2]);
        assert!(boundary_star(&k33(), 0, 2).is_empty());
    }

    #[test]
    fn simple_path_counts_on_k4() {
        let g = k4();
        assert_eq!(count_simple_paths(&g, 0, 1, 1, DEFAULT_PATH_CAP).unwrap(), 1);
        assert_eq!(count_simple_paths(&g, 0, 1, 2, DEFAULT_PATH_CAP).unwrap(), 2);
        assert_eq!(count_simple_paths(&g, 0, 1, 3, DEFAULT_PATH_CAP).unwrap(), 2);
        assert_eq!(count_simple_paths(&g, 0, 1, 4, DEFAULT_PATH_CAP).unwrap(), 0);
        assert!(matches!(
            count_simple_paths(&petersen(), 0, 7, 9, 3),
            Err(Error::CapExceeded(3))
        ));
    }

    #[test]
    fn trajectory_counts_on_k4() {
        let g = k4();
        let es = DirectedEdgeSpace::new(&g);
        let x = es.edge_id(0, 1).unwrap();
        let TrajectoryCounts::Exact(c0) = trajectory_count_vector(&es, x, 0).unwrap() else { panic!() };
        assert_eq!(c0.iter().sum::<u64>(), 1);
        assert_eq!(c0[x], 1);

        let TrajectoryCounts::Exact(c1) = trajectory_count_vector(&es, x, 1).unwrap() else { panic!() };
        for (e, &c) in c1.iter().enumerate() {
            let expect = matches!((es.tail(e), es.head(e)), (1, 2) | (1, 3)) as u64;
            assert_eq!(c, expect);
        }

        let TrajectoryCounts::Exact(c2) = trajectory_count_vector(&es, x, 2).unwrap() else { panic!() };
        for (e, &c) in c2.iter().enumerate() {
            let expect = matches!((es.tail(e), es.head(e)), (2, 0) | (2, 3) | (3, 0) | (3, 2)) as u64;
            assert_eq!(c, expect);
        }
        assert_eq!(c2.iter().sum::<u64>(), 4);
    }

    #[test]
    fn large_exponents_fall_back_to_floating_point() {
        let g = k4();
        let es = DirectedEdgeSpace::new(&g);
        let c = trajectory_count_vector(&es, 0, 62).unwrap();
        assert!(!c.is_exact());
        let total: f64 = c.as_f64().iter().sum();
        assert!((total / 2f64.powi(62) - 1.0).abs() < 1e-12);
        assert!(trajectory_count_vector(&es, 0, 61).unwrap().is_exact());
    }
}

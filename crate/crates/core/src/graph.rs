//! Simple d-regular graphs in flat adjacency arrays, the directed-edge space
//! the non-backtracking walk lives on, validation and the text file format.

use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// An immutable simple d-regular graph.
///
/// Neighbors of `v` occupy `adjacency[v*d .. (v+1)*d]`, in the order the
/// edges were supplied. Equality ignores that order.
#[derive(Clone, Debug)]
pub struct RegularGraph {
    n: usize,
    d: usize,
    adjacency: Vec<u32>,
    edges: Vec<(u32, u32)>,
}

impl RegularGraph {
    /// Build from an undirected edge list. Each vertex's neighbor block lists
    /// its neighbors in edge-list order.
    pub fn from_edges(n: usize, d: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 || d == 0 || n > u32::MAX as usize {
            return Err(Error::BadDegree { n, d });
        }
        let mut fill = vec![0usize; n];
        let mut adjacency = vec![0u32; n * d];
        let mut seen = HashSet::with_capacity(edges.len());
        let mut stored = Vec::with_capacity(edges.len());
        for (i, &(u, v)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::ParseError {
                    line: i + 1,
                    message: format!("edge {u}-{v} names a vertex outside 0..{n}"),
                });
            }
            if u == v || !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::LoopOrMultiEdge { u, v, line: None });
            }
            for (a, b) in [(u, v), (v, u)] {
                if fill[a] == d {
                    return Err(Error::DegreeMismatch {
                        vertex: a,
                        found: d + 1,
                        expected: d,
                    });
                }
                adjacency[a * d + fill[a]] = b as u32;
                fill[a] += 1;
            }
            stored.push((u as u32, v as u32));
        }
        if let Some((vertex, &found)) = fill.iter().enumerate().find(|(_, &f)| f != d) {
            return Err(Error::DegreeMismatch {
                vertex,
                found,
                expected: d,
            });
        }
        Ok(Self {
            n,
            d,
            adjacency,
            edges: stored,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[v * self.d..(v + 1) * self.d]
    }

    pub fn adjacency(&self) -> &[u32] {
        &self.adjacency
    }

    /// Undirected edges in construction order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Number of directed edges, `d·n`.
    pub fn num_directed_edges(&self) -> usize {
        self.n * self.d
    }

    /// Breadth-first distances from `source`; unreachable vertices get `u32::MAX`.
    pub fn bfs_distances(&self, source: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &w in self.neighbors(v) {
                let w = w as usize;
                if dist[w] == u32::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn sorted_blocks(&self) -> Vec<u32> {
        let mut adj = self.adjacency.clone();
        for block in adj.chunks_mut(self.d) {
            block.sort_unstable();
        }
        adj
    }
}

impl PartialEq for RegularGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d && self.sorted_blocks() == other.sorted_blocks()
    }
}

impl Eq for RegularGraph {}

/// The `d·n` directed edges of a regular graph. Edge `e = v·d + slot` runs
/// from `v` to `adjacency[e]`.
#[derive(Clone, Debug)]
pub struct DirectedEdgeSpace<'g> {
    graph: &'g RegularGraph,
    twin: Vec<u32>,
}

impl<'g> DirectedEdgeSpace<'g> {
    /// Index the directed edges of `graph`. Infallible: `RegularGraph` is
    /// simple by construction, so every edge has exactly one reverse.
    pub fn new(graph: &'g RegularGraph) -> Self {
        let d = graph.d;
        let mut twin = vec![0u32; graph.num_directed_edges()];
        for (e, slot) in twin.iter_mut().enumerate() {
            let tail = (e / d) as u32;
            let head = graph.adjacency[e] as usize;
            let back = graph
                .neighbors(head)
                .iter()
                .position(|&w| w == tail)
                .expect("adjacency is symmetric");
            *slot = (head * d + back) as u32;
        }
        Self { graph, twin }
    }

    pub fn graph(&self) -> &'g RegularGraph {
        self.graph
    }

    pub fn len(&self) -> usize {
        self.twin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.twin.is_empty()
    }

    pub fn d(&self) -> usize {
        self.graph.d
    }

    #[inline]
    pub fn tail(&self, e: usize) -> usize {
        e / self.graph.d
    }

    #[inline]
    pub fn head(&self, e: usize) -> usize {
        self.graph.adjacency[e] as usize
    }

    #[inline]
    pub fn twin(&self, e: usize) -> usize {
        self.twin[e] as usize
    }

    /// Edge id of `(u, v)`, if it is an edge.
    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        let d = self.graph.d;
        self.graph
            .neighbors(u)
            .iter()
            .position(|&w| w as usize == v)
            .map(|slot| u * d + slot)
    }

    /// Out-edges of vertex `v`.
    #[inline]
    pub fn out_edges(&self, v: usize) -> std::ops::Range<usize> {
        let d = self.graph.d;
        v * d..(v + 1) * d
    }

    /// Non-backtracking successors of `e`: out-edges of `head(e)` other than `twin(e)`.
    pub fn successors(&self, e: usize) -> impl Iterator<Item = usize> + '_ {
        let back = self.twin(e);
        self.out_edges(self.head(e)).filter(move |&f| f != back)
    }

    /// Non-backtracking predecessors of `f`: in-edges of `tail(f)` other than `twin(f)`.
    pub fn predecessors(&self, f: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_edges(self.tail(f))
            .filter(move |&g| g != f)
            .map(move |g| self.twin(g))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub is_regular: bool,
    pub is_simple: bool,
    pub is_connected: bool,
    pub is_bipartite: bool,
}

/// Full-scan structural checks.
pub fn validate(g: &RegularGraph) -> ValidationReport {
    let (n, d) = (g.n, g.d);
    let is_regular = g.adjacency.len() == n * d && g.edges.len() * 2 == n * d;

    let mut is_simple = true;
    'outer: for v in 0..n {
        let block = g.neighbors(v);
        for (i, &w) in block.iter().enumerate() {
            if w as usize == v || block[..i].contains(&w) {
                is_simple = false;
                break 'outer;
            }
        }
    }

    // BFS 2-colouring over every component.
    let mut colour = vec![u8::MAX; n];
    let mut components = 0;
    let mut is_bipartite = true;
    let mut queue = VecDeque::new();
    for s in 0..n {
        if colour[s] != u8::MAX {
            continue;
        }
        components += 1;
        colour[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            for &w in g.neighbors(v) {
                let w = w as usize;
                if colour[w] == u8::MAX {
                    colour[w] = 1 - colour[v];
                    queue.push_back(w);
                } else if colour[w] == colour[v] {
                    is_bipartite = false;
                }
            }
        }
    }

    ValidationReport {
        is_regular,
        is_simple,
        is_connected: components == 1,
        is_bipartite,
    }
}

/// Parse the text format: first non-comment line `n d`, then `d·n/2` lines
/// `u v`. Lines starting with `#` and blank lines are skipped.
pub fn parse_graph(text: &str) -> Result<RegularGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    let mut fill: Vec<usize> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::ParseError {
                line,
                message: format!("expected two integers, found {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::ParseError {
                line,
                message: format!("not a nonnegative integer: {s:?}"),
            })
        };
        let (a, b) = (parse(fields[0])?, parse(fields[1])?);
        match header {
            None => {
                if a == 0 || b == 0 || (a * b) % 2 == 1 {
                    return Err(Error::ParseError {
                        line,
                        message: format!("invalid header n={a} d={b}"),
                    });
                }
                header = Some((a, b));
                fill = vec![0; a];
            }
            Some((n, d)) => {
                if a >= n || b >= n {
                    return Err(Error::ParseError {
                        line,
                        message: format!("vertex out of range 0..{n}"),
                    });
                }
                if a == b || !seen.insert((a.min(b), a.max(b))) {
                    return Err(Error::LoopOrMultiEdge {
                        u: a,
                        v: b,
                        line: Some(line),
                    });
                }
                for v in [a, b] {
                    fill[v] += 1;
                    if fill[v] > d {
                        return Err(Error::DegreeMismatch {
                            vertex: v,
                            found: fill[v],
                            expected: d,
                        });
                    }
                }
                edges.push((a, b));
            }
        }
    }

    let (n, d) = header.ok_or(Error::ParseError {
        line: text.lines().count().max(1),
        message: "missing \"n d\" header".into(),
    })?;
    RegularGraph::from_edges(n, d, &edges)
}

/// Render `g` in the text format, preceded by `comments` as `#` lines.
pub fn format_graph(g: &RegularGraph, comments: &[String]) -> String {
    let mut out = String::with_capacity(16 + g.edges.len() * 14);
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "{} {}", g.n, g.d);
    for &(u, v) in &g.edges {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<RegularGraph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_graph(&text)
}

pub fn save_graph(g: &RegularGraph, path: impl AsRef<Path>) -> Result<()> {
    save_graph_with_comments(g, path, &[])
}

pub fn save_graph_with_comments(
    g: &RegularGraph,
    path: impl AsRef<Path>,
    comments: &[String],
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_graph(g, comments)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Small named graphs used as fixtures throughout the test suites.
pub mod fixtures {
    use super::RegularGraph;

    pub fn complete(k: usize) -> RegularGraph {
        let edges: Vec<_> = (0..k)
            .flat_map(|u| (u + 1..k).map(move |v| (u, v)))
            .collect();
        RegularGraph::from_edges(k, k - 1, &edges).expect("complete graph")
    }

    pub fn k4() -> RegularGraph {
        complete(4)
    }

    /// K_{a,a}: parts `0..a` and `a..2a`.
    pub fn complete_bipartite(a: usize) -> RegularGraph {
        let edges: Vec<_> = (0..a)
            .flat_map(|u| (0..a).map(move |v| (u, a + v)))
            .collect();
        RegularGraph::from_edges(2 * a, a, &edges).expect("complete bipartite graph")
    }

    pub fn k33() -> RegularGraph {
        complete_bipartite(3)
    }

    /// Outer 5-cycle 0..5, inner pentagram 5..10, spokes i to i+5.
    pub fn petersen() -> RegularGraph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((5 + i, 5 + (i + 2) % 5));
        }
        RegularGraph::from_edges(10, 3, &edges).expect("Petersen graph")
    }

    /// Two disjoint copies of K4.
    pub fn two_k4() -> RegularGraph {
        let mut edges = Vec::new();
        for base in [0, 4] {
            for u in 0..4 {
                for v in u + 1..4 {
                    edges.push((base + u, base + v));
                }
            }
        }
        RegularGraph::from_edges(8, 3, &edges).expect("two copies of K4")
    }
}

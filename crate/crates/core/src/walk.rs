//! Matrix-free transition kernels for the simple, lazy and non-backtracking
//! random walks, and exact evolution of distributions under them.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{DirectedEdgeSpace, RegularGraph};

/// Where a distribution lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateSpace {
    Vertices(usize),
    DirectedEdges(usize),
}

impl StateSpace {
    pub fn size(self) -> usize {
        match self {
            Self::Vertices(n) | Self::DirectedEdges(n) => n,
        }
    }
}

impl fmt::Display for StateSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Vertices(n) => write!(f, "vertices({n})"),
            Self::DirectedEdges(n) => write!(f, "directed_edges({n})"),
        }
    }
}

fn check_space(expected: StateSpace, found: StateSpace) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::SpaceMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        })
    }
}

/// Tolerance on total mass for a valid distribution.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// A probability distribution on a state space.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector {
    space: StateSpace,
    values: Vec<f64>,
}

impl ProbVector {
    /// Validates nonnegativity and unit mass.
    pub fn new(space: StateSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.size() {
            return Err(Error::SpaceMismatch {
                expected: space.to_string(),
                found: format!("{} entries", values.len()),
            });
        }
        let total = neumaier_sum(&values);
        if values.iter().any(|&x| x.is_nan() || x < 0.0) || (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::MassDrift {
                drift: total - 1.0,
                steps: 0,
            });
        }
        Ok(Self { space, values })
    }

    pub fn point_mass(space: StateSpace, state: usize) -> Result<Self> {
        let size = space.size();
        if state >= size {
            return Err(Error::IndexOutOfRange { index: state, size });
        }
        let mut values = vec![0.0; size];
        values[state] = 1.0;
        Ok(Self { space, values })
    }

    pub fn uniform(space: StateSpace) -> Self {
        let size = space.size();
        Self {
            space,
            values: vec![1.0 / size as f64; size],
        }
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mass(&self) -> f64 {
        neumaier_sum(&self.values)
    }
}

/// Compensated summation, used for mass checks.
pub fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WalkKind {
    Srw,
    Lazy,
    Nbrw,
}

impl fmt::Display for WalkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Srw => "srw",
            Self::Lazy => "lazy",
            Self::Nbrw => "nbrw",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Start {
    PointMass(usize),
    Uniform,
}

pub fn initial_distribution(space: StateSpace, start: Start) -> Result<ProbVector> {
    match start {
        Start::PointMass(s) => ProbVector::point_mass(space, s),
        Start::Uniform => Ok(ProbVector::uniform(space)),
    }
}

/// Steps between mass checks and renormalization.
pub const RENORMALIZE_EVERY: usize = 64;
/// Allowed mass drift per step before a renormalization.
pub const DRIFT_PER_STEP: f64 = 1e-12;
/// Below this many states a step runs sequentially.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// A transition kernel on a regular graph.
#[derive(Clone, Copy, Debug)]
pub enum Kernel<'a> {
    Srw(&'a RegularGraph),
    Lazy(&'a RegularGraph),
    Nbrw(&'a DirectedEdgeSpace<'a>),
}

impl<'a> Kernel<'a> {
    pub fn kind(&self) -> WalkKind {
        match self {
            Self::Srw(_) => WalkKind::Srw,
            Self::Lazy(_) => WalkKind::Lazy,
            Self::Nbrw(_) => WalkKind::Nbrw,
        }
    }

    pub fn graph(&self) -> &'a RegularGraph {
        match self {
            Self::Srw(g) | Self::Lazy(g) => g,
            Self::Nbrw(es) => es.graph(),
        }
    }

    pub fn space(&self) -> StateSpace {
        match self {
            Self::Srw(g) | Self::Lazy(g) => StateSpace::Vertices(g.n()),
            Self::Nbrw(es) => StateSpace::DirectedEdges(es.len()),
        }
    }

    /// One step of `src ↦ src·P` into `dst`. Every entry of `dst` is a gather
    /// over a fixed list of predecessors, so the result does not depend on
    /// how the states are split across threads.
    pub fn step_into(&self, src: &[f64], dst: &mut [f64]) {
        match *self {
            Self::Srw(g) => {
                let inv = 1.0 / g.d() as f64;
                for_each_state(dst, |v| g.neighbors(v).iter().map(|&w| src[w as usize]).sum::<f64>() * inv);
            }
            Self::Lazy(g) => {
                let inv = 1.0 / g.d() as f64;
                for_each_state(dst, |v| {
                    let moved = g.neighbors(v).iter().map(|&w| src[w as usize]).sum::<f64>() * inv;
                    0.5 * src[v] + 0.5 * moved
                });
            }
            Self::Nbrw(es) => {
                let inv = 1.0 / (es.d() - 1) as f64;
                for_each_state(dst, |f| es.predecessors(f).map(|e| src[e]).sum::<f64>() * inv);
            }
        }
    }

    /// Exact `steps`-step push-forward of `mu`.
    pub fn evolve(&self, mu: &ProbVector, steps: usize) -> Result<ProbVector> {
        let mut evolution = Evolution::new(*self, mu.clone())?;
        for _ in 0..steps {
            evolution.advance()?;
        }
        Ok(evolution.into_current())
    }
}

fn for_each_state(dst: &mut [f64], f: impl Fn(usize) -> f64 + Sync) {
    if dst.len() >= PARALLEL_THRESHOLD {
        dst.par_iter_mut().enumerate().for_each(|(i, x)| *x = f(i));
    } else {
        dst.iter_mut().enumerate().for_each(|(i, x)| *x = f(i));
    }
}

/// Step-by-step evolution of one distribution, with periodic mass checks.
pub struct Evolution<'a> {
    kernel: Kernel<'a>,
    current: Vec<f64>,
    scratch: Vec<f64>,
    time: usize,
    since_check: usize,
}

impl<'a> Evolution<'a> {
    pub fn new(kernel: Kernel<'a>, mu: ProbVector) -> Result<Self> {
        check_space(kernel.space(), mu.space())?;
        let values = mu.into_values();
        let len = values.len();
        Ok(Self {
            kernel,
            current: values,
            scratch: vec![0.0; len],
            time: 0,
            since_check: 0,
        })
    }

    pub fn time(&self) -> usize {
        self.time
    }

    pub fn current(&self) -> &[f64] {
        &self.current
    }

    /// Advance one step. Every [`RENORMALIZE_EVERY`] steps the mass is checked
    /// against the drift allowance and rescaled to one; excess drift is an error.
    pub fn advance(&mut self) -> Result<&[f64]> {
        self.kernel.step_into(&self.current, &mut self.scratch);
        std::mem::swap(&mut self.current, &mut self.scratch);
        self.time += 1;
        self.since_check += 1;
        if self.since_check == RENORMALIZE_EVERY {
            self.renormalize()?;
        }
        Ok(&self.current)
    }

    fn renormalize(&mut self) -> Result<()> {
        let mass = neumaier_sum(&self.current);
        let drift = (mass - 1.0).abs();
        if drift > DRIFT_PER_STEP * (self.since_check + 1) as f64 {
            return Err(Error::MassDrift {
                drift: mass - 1.0,
                steps: self.since_check,
            });
        }
        let scale = 1.0 / mass;
        self.current.iter_mut().for_each(|x| *x *= scale);
        self.since_check = 0;
        Ok(())
    }

    pub fn into_current(self) -> ProbVector {
        ProbVector {
            space: self.kernel.space(),
            values: self.current,
        }
    }
}

/// Vertex marginal of an edge distribution: `(x, y) ↦ y`.
pub fn project_to_vertices(es: &DirectedEdgeSpace<'_>, mu: &ProbVector) -> Result<ProbVector> {
    check_space(StateSpace::DirectedEdges(es.len()), mu.space())?;
    Ok(ProbVector {
        space: StateSpace::Vertices(es.graph().n()),
        values: project_values(es, mu.values()),
    })
}

pub(crate) fn project_values(es: &DirectedEdgeSpace<'_>, values: &[f64]) -> Vec<f64> {
    (0..es.graph().n())
        .map(|v| es.out_edges(v).map(|e| values[es.twin(e)]).sum())
        .collect()
}

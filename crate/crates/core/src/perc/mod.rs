//! Bond percolation on the lazy graphs: reproducible edge states and
//! constrained cluster exploration.

mod hash;
mod profile;
mod sweep;

use std::collections::BTreeMap;

use serde::Serialize;

pub use hash::{derive_seed, edge_uniform, edge_uniform_between, mix_bytes, splitmix64, EdgeKey, EDGE_TAG, REPLICA_TAG};
pub use profile::{
    ascent, band_occupancy, connections, forward_constraint, forward_endpoint, forward_profile, full_profile, gw_offspring,
    isolated_height, reaches_level, survives, upward_profile, upward_set, Profile, ProfileMode, Reach,
};

use crate::error::{Error, Result};
use crate::graphs::{Lattice, TreeAddress, Vertex};
use sweep::{with_sweep, Event, Flow, Growth, Outcome, Plan};

/// Default limit on vertex expansions per exploration.
pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// Source of open/closed states for edges.
pub trait EdgeStates {
    fn is_open(&mut self, u: &Vertex, v: &Vertex) -> bool;
}

impl<T: EdgeStates + ?Sized> EdgeStates for &mut T {
    fn is_open(&mut self, u: &Vertex, v: &Vertex) -> bool {
        (**self).is_open(u, v)
    }
}

/// Hash-based percolation configuration: edge `e` is open iff its uniform
/// under `seed` is below `p`.
///
/// No memo table is needed: the uniform is a pure function of the seed and
/// the edge, so repeated queries always agree.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeSampler {
    pub seed: u64,
    pub p: f64,
}

impl EdgeSampler {
    pub fn new(seed: u64, p: f64) -> Self {
        Self { seed, p }
    }

    pub fn uniform(&self, u: &Vertex, v: &Vertex) -> f64 {
        edge_uniform_between(self.seed, u, v)
    }

    /// Same seed at another density; open sets are nested in `p`.
    pub fn at(&self, p: f64) -> Self {
        Self { seed: self.seed, p }
    }
}

impl EdgeStates for EdgeSampler {
    #[inline]
    fn is_open(&mut self, u: &Vertex, v: &Vertex) -> bool {
        if self.p <= 0.0 {
            false
        } else if self.p >= 1.0 {
            true
        } else {
            edge_uniform_between(self.seed, u, v) < self.p
        }
    }
}

/// Restriction on the vertices and moves of an exploration.
///
/// The level window is relative to the level of the starting vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Constraint {
    pub lo: Option<i64>,
    pub hi: Option<i64>,
    /// Confine paths to the downwards subtree of this tree vertex.
    pub subtree: Option<TreeAddress>,
    /// Lamp position whose state may never change along a path.
    pub frozen_lamp: Option<i64>,
}

impl Constraint {
    pub fn free() -> Self {
        Self::default()
    }

    pub fn window(lo: Option<i64>, hi: Option<i64>) -> Self {
        Self { lo, hi, ..Self::default() }
    }

    pub fn with_subtree(mut self, root: TreeAddress) -> Self {
        self.subtree = Some(root);
        self
    }

    pub fn with_frozen_lamp(mut self, x: Option<i64>) -> Self {
        self.frozen_lamp = x;
        self
    }

    /// Vertex condition, for a start vertex at level `base`.
    #[inline]
    pub fn admits(&self, base: i64, v: &Vertex) -> bool {
        let rel = v.level() - base;
        if self.lo.is_some_and(|lo| rel < lo) || self.hi.is_some_and(|hi| rel > hi) {
            return false;
        }
        match &self.subtree {
            None => true,
            Some(root) => v.as_tree().is_some_and(|t| t.is_descendant_of(root)),
        }
    }

    /// Move condition for the step `u -> v`.
    #[inline]
    pub fn edge_allowed(&self, u: &Vertex, v: &Vertex) -> bool {
        match (self.frozen_lamp, u, v) {
            (Some(x), Vertex::Lamp(g), Vertex::Lamp(h)) => g.is_lit(x) == h.is_lit(x),
            _ => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Exhausted,
    /// Budget of vertex expansions that ran out.
    Truncated(u64),
}

/// Result of a single constrained exploration.
#[derive(Clone, Debug)]
pub struct ClusterReport {
    /// Visited vertices in breadth-first order.
    pub visited: Vec<Vertex>,
    pub per_level: BTreeMap<i64, u64>,
    pub status: Status,
    pub edges_examined: u64,
}

impl ClusterReport {
    pub fn is_exhausted(&self) -> bool {
        self.status == Status::Exhausted
    }
}

pub(crate) fn check_start<L: Lattice + ?Sized>(lattice: &L, o: &Vertex, c: &Constraint) -> Result<()> {
    lattice.kernel().validate(o)?;
    if !lattice.contains(o) {
        return Err(Error::OutsideHalfGraph(o.to_string()));
    }
    if !c.admits(o.level(), o) {
        return Err(Error::OriginExcluded);
    }
    Ok(())
}

pub(crate) fn check_budget(budget: u64) -> Result<()> {
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    Ok(())
}

/// Breadth-first exploration of the open cluster of `o` under `constraint`.
///
/// At most `budget` vertices are expanded; a truncated report holds a
/// subset of the constrained cluster.
pub fn explore<L, S>(lattice: &L, states: &mut S, o: &Vertex, constraint: &Constraint, budget: u64) -> Result<ClusterReport>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    check_start(lattice, o, constraint)?;
    check_budget(budget)?;
    let plan = Plan { base: o.level(), constraint, growth: Growth::Fixed, max_phase: 0 };
    let mut visited = Vec::new();
    let mut per_level = BTreeMap::new();
    let (outcome, edges_examined) = with_sweep(|sweep| {
        let outcome = sweep.run(
            lattice,
            states,
            o,
            &plan,
            budget,
            |event| {
                if let Event::Visit(v) = event {
                    *per_level.entry(v.level()).or_insert(0) += 1;
                    visited.push(v.clone());
                }
                Flow::Continue
            },
        );
        (outcome, sweep.edges_examined)
    });
    let status = match outcome {
        Outcome::Censored(_) => Status::Truncated(budget),
        _ => Status::Exhausted,
    };
    Ok(ClusterReport { visited, per_level, status, edges_examined })
}

//! Exact answers on finite truncations by enumerating every edge
//! configuration.
//!
//! Configurations are bit masks over the edge list of a [`FiniteSubgraph`]
//! (bit `e` set means edge `e` is open). Each observable is evaluated from
//! its set definition on every configuration, independently of the
//! exploration code in `perc`, and the results are folded into a polynomial
//! in `p` with rational coefficients.

mod bk;
mod loops;
mod poly;

pub use bk::{bk_disjoint, bk_library, BkCase, BkResult, SmallGraph};
pub use loops::{count_simple_loops, MAX_LOOP_HALF_LENGTH};
pub use poly::ExactPoly;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::estimate::Statistic;
use crate::graphs::{FiniteSubgraph, Vertex};
use crate::perc::{forward_constraint, forward_endpoint, upward_set, Constraint, EdgeStates, ProfileMode, DEFAULT_BUDGET};

/// Most edges accepted by the polynomial computations.
pub const MAX_EDGES: usize = 24;
/// Most vertices accepted (vertex sets are 64-bit masks).
pub const MAX_VERTICES: usize = 64;

/// Fixed edge configuration of a finite subgraph, usable wherever `perc`
/// expects edge states. Edges outside the subgraph are closed.
#[derive(Clone, Copy, Debug)]
pub struct Configuration<'g> {
    pub graph: &'g FiniteSubgraph,
    pub open: u64,
}

impl EdgeStates for Configuration<'_> {
    fn is_open(&mut self, u: &Vertex, v: &Vertex) -> bool {
        let (Some(i), Some(j)) = (self.graph.index_of(u), self.graph.index_of(v)) else { return false };
        self.graph.edge_index(i, j).is_some_and(|e| self.open >> e & 1 == 1)
    }
}

/// Adjacency with edge bits, for reachability under a mask.
struct Bits {
    adj: Vec<Vec<(usize, u64)>>,
    /// `ends[e]` is the vertex mask of edge `e`.
    ends: Vec<u64>,
}

impl Bits {
    fn new(g: &FiniteSubgraph) -> Self {
        let mut adj = vec![Vec::new(); g.num_vertices()];
        let mut ends = Vec::with_capacity(g.num_edges());
        for (e, &(i, j)) in g.edges.iter().enumerate() {
            adj[i].push((j, 1 << e));
            adj[j].push((i, 1 << e));
            ends.push(1 << i | 1 << j);
        }
        Self { adj, ends }
    }

    /// Edges with both ends in `region` and passing `allowed`.
    fn edges_within(&self, g: &FiniteSubgraph, region: u64, allowed: impl Fn(&Vertex, &Vertex) -> bool) -> u64 {
        let mut mask = 0;
        for (e, &(i, j)) in g.edges.iter().enumerate() {
            if self.ends[e] & region == self.ends[e] && allowed(&g.vertices[i], &g.vertices[j]) {
                mask |= 1 << e;
            }
        }
        mask
    }

    /// Vertices joined to `start` by open edges of `open`.
    fn reach(&self, start: usize, open: u64) -> u64 {
        let mut seen = 1u64 << start;
        let mut stack = [0usize; MAX_VERTICES];
        stack[0] = start;
        let mut top = 1;
        while top > 0 {
            top -= 1;
            let v = stack[top];
            for &(w, bit) in &self.adj[v] {
                if open & bit != 0 && seen >> w & 1 == 0 {
                    seen |= 1 << w;
                    stack[top] = w;
                    top += 1;
                }
            }
        }
        seen
    }
}

fn check_size(g: &FiniteSubgraph, limit: usize) -> Result<()> {
    if g.num_edges() > limit {
        return Err(Error::SizeLimit { what: "truncation", edges: g.num_edges(), limit });
    }
    if g.num_vertices() > MAX_VERTICES {
        return Err(Error::SizeLimit { what: "vertex set", edges: g.num_vertices(), limit: MAX_VERTICES });
    }
    Ok(())
}

fn vertex_mask(g: &FiniteSubgraph, keep: impl Fn(&Vertex) -> bool) -> u64 {
    g.vertices.iter().enumerate().filter(|(_, v)| keep(v)).fold(0, |m, (i, _)| m | 1 << i)
}

fn require_level(g: &FiniteSubgraph, level: i64) -> Result<()> {
    if !g.levels.contains(&level) {
        return Err(Error::TruncationTooSmall(format!("no vertex at level {level}")));
    }
    Ok(())
}

/// `E[value]` as a polynomial: sums `value(mask)` over configurations,
/// grouped by the number of open edges.
pub fn expectation_poly(g: &FiniteSubgraph, value: impl Fn(u64) -> u64) -> Result<ExactPoly> {
    check_size(g, MAX_EDGES)?;
    let m = g.num_edges();
    let mut by_open = vec![0u128; m + 1];
    for mask in 0..1u64 << m {
        by_open[mask.count_ones() as usize] += value(mask) as u128;
    }
    let hist: Vec<BigUint> = by_open.into_iter().map(BigUint::from).collect();
    Ok(ExactPoly::from_bernstein(&hist, m))
}

/// Forward region for `V_k^+(x)`: the vertices admitted by the forward
/// constraint and the moves it allows.
struct Region {
    start: usize,
    open_mask: u64,
    targets: u64,
}

impl Region {
    fn forward(g: &FiniteSubgraph, bits: &Bits, x: usize, k: u32) -> Self {
        let xv = &g.vertices[x];
        let c = forward_constraint(&g.kernel, xv, Some(k as i64));
        let region = vertex_mask(g, |v| c.admits(xv.level(), v));
        let level = xv.level() + k as i64;
        let targets = vertex_mask(g, |v| v.level() == level && forward_endpoint(&g.kernel, v)) & region;
        Region { start: x, open_mask: bits.edges_within(g, region, |u, v| c.edge_allowed(u, v)), targets }
    }

    fn window(g: &FiniteSubgraph, bits: &Bits, x: usize, c: &Constraint, target_level: i64) -> Self {
        let xv = &g.vertices[x];
        let region = vertex_mask(g, |v| c.admits(xv.level(), v));
        let targets = vertex_mask(g, |v| v.level() == target_level) & region;
        Region { start: x, open_mask: bits.edges_within(g, region, |u, v| c.edge_allowed(u, v)), targets }
    }

    fn reach(&self, bits: &Bits, mask: u64) -> u64 {
        bits.reach(self.start, mask & self.open_mask)
    }
}

/// Candidates `x` at `k` levels above the origin together with the region
/// defining whether the origin lies in their forward (`free = false`) or
/// downward (`free = true`) cluster.
fn upward_candidates(g: &FiniteSubgraph, bits: &Bits, k: u32, free: bool) -> Vec<Region> {
    let o = g.origin_vertex();
    let level = o.level() - k as i64;
    (0..g.num_vertices())
        .filter(|&x| g.levels[x] == level)
        .map(|x| {
            if free {
                Region::window(g, bits, x, &Constraint::window(Some(0), None), o.level())
            } else {
                Region::forward(g, bits, x, k)
            }
        })
        .collect()
}

/// Per-configuration value of `stat` from its set definition.
fn evaluator<'a>(g: &'a FiniteSubgraph, stat: &Statistic) -> Result<Box<dyn Fn(u64) -> u64 + 'a>> {
    let bits = Bits::new(g);
    let o = g.origin;
    let ov = g.origin_vertex().clone();
    let obit = 1u64 << o;
    Ok(match *stat {
        Statistic::E(k) => {
            require_level(g, ov.level() + k as i64)?;
            let r = Region::forward(g, &bits, o, k);
            Box::new(move |mask| (r.reach(&bits, mask) & r.targets).count_ones() as u64)
        }
        Statistic::Band(k) => {
            let span = g.kernel.family.span();
            require_level(g, ov.level() + (k + span) as i64)?;
            let regions: Vec<Region> = (k..=k + span).map(|j| Region::forward(g, &bits, o, j)).collect();
            Box::new(move |mask| regions.iter().map(|r| (r.reach(&bits, mask) & r.targets).count_ones() as u64).sum())
        }
        Statistic::VMinus(k) | Statistic::AMinus(k) | Statistic::Ascent(k) => {
            require_level(g, ov.level() - k as i64)?;
            let free = !matches!(stat, Statistic::VMinus(_));
            let cands = upward_candidates(g, &bits, k, free);
            let count = move |mask: u64| cands.iter().filter(|r| r.reach(&bits, mask) & obit != 0).count() as u64;
            if matches!(stat, Statistic::Ascent(_)) {
                Box::new(move |mask| (count(mask) > 0) as u64)
            } else {
                Box::new(count)
            }
        }
        Statistic::WMinus(k) => {
            require_level(g, ov.level() - k as i64)?;
            let level = vertex_mask(g, |v| v.level() == ov.level() - k as i64);
            Box::new(move |mask| (bits.reach(o, mask) & level).count_ones() as u64)
        }
        Statistic::Tau(ref y) => {
            let yi = g.index_of(y).ok_or_else(|| Error::TruncationTooSmall(format!("{y} not in truncation")))?;
            Box::new(move |mask| (bits.reach(o, mask) >> yi & 1) as u64)
        }
        Statistic::IsolatedTail(t) => {
            let Some(ot) = ov.as_tree().filter(|_| g.kernel.family.is_tree_based()) else {
                return Err(Error::WrongFamily { expected: "a tree-based family", got: g.kernel.to_string() });
            };
            // crossing[s]: edges with exactly one end below the s-th ancestor.
            let crossing: Vec<u64> = (0..=t)
                .map(|s| {
                    let root = ot.ancestor(s as u64);
                    let inside = vertex_mask(g, |v| v.as_tree().is_some_and(|v| v.is_descendant_of(&root)));
                    (0..g.num_edges())
                        .filter(|&e| (bits.ends[e] & inside).count_ones() == 1)
                        .fold(0u64, |m, e| m | 1 << e)
                })
                .collect();
            Box::new(move |mask| crossing.iter().all(|&c| mask & c != 0) as u64)
        }
    })
}

/// `E[stat]` on the truncation as an exact polynomial in `p`.
pub fn exact_statistic_poly(g: &FiniteSubgraph, stat: &Statistic) -> Result<ExactPoly> {
    check_size(g, MAX_EDGES)?;
    let f = evaluator(g, stat)?;
    expectation_poly(g, f)
}

/// `P(x ↔ y)` on the truncation.
pub fn exact_connection_poly(g: &FiniteSubgraph, x: &Vertex, y: &Vertex) -> Result<ExactPoly> {
    check_size(g, MAX_EDGES)?;
    let xi = g.index_of(x).ok_or_else(|| Error::InvalidArgument(format!("{x} not in subgraph")))?;
    let yi = g.index_of(y).ok_or_else(|| Error::InvalidArgument(format!("{y} not in subgraph")))?;
    let bits = Bits::new(g);
    expectation_poly(g, |mask| (bits.reach(xi, mask) >> yi & 1) as u64)
}

/// Expected level count at offset `k` from the origin for the given mode.
pub fn exact_profile_poly(g: &FiniteSubgraph, mode: ProfileMode, k: u32) -> Result<ExactPoly> {
    let stat = match mode {
        ProfileMode::Forward => Statistic::E(k),
        ProfileMode::UpwardWindow => Statistic::VMinus(k),
        ProfileMode::UpwardFree => Statistic::AMinus(k),
        ProfileMode::FullCluster => Statistic::WMinus(k),
    };
    exact_statistic_poly(g, &stat)
}

/// Which upward set to compare.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UpwardMode {
    /// `V_k^-`: the origin lies in the forward cluster of the candidate.
    VMinus,
    /// `U_k^-`: the origin lies in the downward cluster of the candidate.
    UMinus,
}

/// Checks, for every configuration, that the candidate definition of the
/// upward set agrees with the reversed search in `perc`.
pub fn reverse_equivalence(g: &FiniteSubgraph, k: u32, mode: UpwardMode) -> Result<bool> {
    check_size(g, MAX_EDGES)?;
    let bits = Bits::new(g);
    let free = mode == UpwardMode::UMinus;
    let cands = upward_candidates(g, &bits, k, free);
    let obit = 1u64 << g.origin;
    let lattice = g.to_lattice();
    let o = g.origin_vertex();
    for mask in 0..1u64 << g.num_edges() {
        let mut by_definition: Vec<&Vertex> =
            cands.iter().filter(|r| r.reach(&bits, mask) & obit != 0).map(|r| &g.vertices[r.start]).collect();
        by_definition.sort_unstable();
        let mut states = Configuration { graph: g, open: mask };
        let Some(reversed) = upward_set(&lattice, &mut states, o, k, free, DEFAULT_BUDGET)? else {
            return Err(Error::Estimation("reversed search censored on a finite graph".into()));
        };
        if reversed.len() != by_definition.len() || reversed.iter().zip(&by_definition).any(|(a, b)| a != *b) {
            return Ok(false);
        }
    }
    Ok(true)
}

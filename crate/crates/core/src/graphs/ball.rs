//! Finite pieces of the lazy graphs: balls, level-window truncations,
//! boundary ratios and breadth-first distances.


use num_rational::Ratio;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use super::{Kernel, Lattice, Vertex};
use crate::error::{Error, Result};

pub const DEFAULT_MAX_RADIUS: u32 = 12;
pub const DEFAULT_MAX_BALL_VERTICES: usize = 1 << 21;

/// Explicit finite induced subgraph with a distinguished origin.
///
/// Vertices are ordered by their canonical byte encoding and edges are
/// pairs `(i, j)` with `i < j`, sorted lexicographically.
#[derive(Clone, Debug)]
pub struct FiniteSubgraph {
    pub kernel: Kernel,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<(usize, usize)>,
    pub origin: usize,
    pub levels: Vec<i64>,
    index: FxHashMap<Vertex, usize>,
}

impl FiniteSubgraph {
    /// Induced subgraph of `kernel` on `members`; `origin` must be a member.
    pub fn induced(kernel: Kernel, origin: &Vertex, members: impl IntoIterator<Item = Vertex>) -> Result<Self> {
        let mut keyed: Vec<(Vec<u8>, Vertex)> = members.into_iter().map(|v| (v.encode(), v)).collect();
        keyed.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        keyed.dedup_by(|a, b| a.0 == b.0);
        let vertices: Vec<Vertex> = keyed.into_iter().map(|(_, v)| v).collect();
        let index: FxHashMap<Vertex, usize> = vertices.iter().cloned().zip(0..).collect();
        let origin = *index
            .get(origin)
            .ok_or_else(|| Error::InvalidArgument(format!("origin {origin} not in vertex set")))?;
        let mut edges = Vec::new();
        let mut buf = Vec::new();
        for (i, v) in vertices.iter().enumerate() {
            buf.clear();
            kernel.push_neighbors(v, &mut buf);
            for w in &buf {
                if let Some(&j) = index.get(w) {
                    if i < j {
                        edges.push((i, j));
                    }
                }
            }
        }
        edges.sort_unstable();
        edges.dedup();
        let levels = vertices.iter().map(Vertex::level).collect();
        Ok(Self { kernel, vertices, edges, origin, levels, index })
    }

    pub fn index_of(&self, v: &Vertex) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn origin_vertex(&self) -> &Vertex {
        &self.vertices[self.origin]
    }

    /// Adjacency lists of `(neighbor, edge index)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (e, &(i, j)) in self.edges.iter().enumerate() {
            adj[i].push((j, e));
            adj[j].push((i, e));
        }
        adj
    }

    /// Index of the edge joining two vertex indices.
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i < j { (i, j) } else { (j, i) };
        self.edges.binary_search(&key).ok()
    }

    /// Same region seen as an explorable lattice rooted at `origin`.
    pub fn to_lattice(&self) -> Truncated {
        Truncated {
            kernel: self.kernel,
            origin: self.origin_vertex().clone(),
            members: self.vertices.iter().cloned().collect(),
        }
    }

    /// Same vertex set rooted at a different member.
    pub fn rerooted(&self, origin: &Vertex) -> Result<Self> {
        let mut g = self.clone();
        g.origin = self
            .index_of(origin)
            .ok_or_else(|| Error::InvalidArgument(format!("{origin} not in subgraph")))?;
        Ok(g)
    }
}

/// Finite region: the breadth-first ball of `radius` around a center, taken
/// inside the level window `[center + lo, center + hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Truncation {
    pub radius: u32,
    pub lo: Option<i64>,
    pub hi: Option<i64>,
}

impl Truncation {
    pub fn new(radius: u32, lo: Option<i64>, hi: Option<i64>) -> Self {
        Self { radius, lo, hi }
    }

    pub fn build(&self, kernel: &Kernel, center: &Vertex) -> Result<FiniteSubgraph> {
        kernel.validate(center)?;
        if !kernel.contains(center) {
            return Err(Error::OutsideHalfGraph(center.to_string()));
        }
        let base = center.level();
        let inside = |v: &Vertex| {
            let rel = v.level() - base;
            self.lo.is_none_or(|lo| rel >= lo) && self.hi.is_none_or(|hi| rel <= hi)
        };
        let members = bfs_layers(kernel, center, self.radius, DEFAULT_MAX_BALL_VERTICES, inside)?;
        FiniteSubgraph::induced(*kernel, center, members.into_iter().map(|(v, _)| v))
    }
}

/// A kernel cut down to a finite induced region.
#[derive(Clone, Debug)]
pub struct Truncated {
    kernel: Kernel,
    origin: Vertex,
    members: FxHashSet<Vertex>,
}

impl Truncated {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl Lattice for Truncated {
    fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    fn origin(&self) -> Vertex {
        self.origin.clone()
    }

    fn push_neighbors(&self, v: &Vertex, out: &mut Vec<Vertex>) {
        if !self.members.contains(v) {
            return;
        }
        let start = out.len();
        self.kernel.push_neighbors(v, out);
        let mut i = start;
        while i < out.len() {
            if self.members.contains(&out[i]) {
                i += 1;
            } else {
                out.remove(i);
            }
        }
    }

    fn contains(&self, v: &Vertex) -> bool {
        self.members.contains(v)
    }
}

fn bfs_layers(
    kernel: &Kernel,
    center: &Vertex,
    radius: u32,
    max_vertices: usize,
    admit: impl Fn(&Vertex) -> bool,
) -> Result<Vec<(Vertex, u32)>> {
    let mut seen: FxHashSet<Vertex> = FxHashSet::default();
    seen.insert(center.clone());
    let mut order = vec![(center.clone(), 0u32)];
    let mut head = 0;
    let mut buf = Vec::new();
    while head < order.len() {
        let (v, dist) = order[head].clone();
        head += 1;
        if dist == radius {
            continue;
        }
        buf.clear();
        kernel.push_neighbors(&v, &mut buf);
        for w in buf.drain(..) {
            if admit(&w) && !seen.contains(&w) {
                seen.insert(w.clone());
                order.push((w, dist + 1));
                if order.len() > max_vertices {
                    return Err(Error::BallTooLarge { radius, limit: max_vertices });
                }
            }
        }
    }
    Ok(order)
}

/// Induced ball of radius `r` around `v`, with the default limits.
pub fn ball(kernel: &Kernel, v: &Vertex, r: u32) -> Result<FiniteSubgraph> {
    ball_with_limits(kernel, v, r, DEFAULT_MAX_RADIUS, DEFAULT_MAX_BALL_VERTICES)
}

pub fn ball_with_limits(
    kernel: &Kernel,
    v: &Vertex,
    r: u32,
    max_radius: u32,
    max_vertices: usize,
) -> Result<FiniteSubgraph> {
    if r > max_radius {
        return Err(Error::RadiusTooLarge { radius: r, max: max_radius });
    }
    kernel.validate(v)?;
    if !kernel.contains(v) {
        return Err(Error::OutsideHalfGraph(v.to_string()));
    }
    let members = bfs_layers(kernel, v, r, max_vertices, |_| true)?;
    FiniteSubgraph::induced(*kernel, v, members.into_iter().map(|(u, _)| u))
}

/// `|∂K| / |K|` for `K` the ball of radius `r` around `v`.
pub fn boundary_ratio(kernel: &Kernel, v: &Vertex, r: u32) -> Result<Ratio<u64>> {
    let g = ball(kernel, v, r)?;
    let mut boundary = 0u64;
    let mut buf = Vec::new();
    for u in &g.vertices {
        buf.clear();
        kernel.push_neighbors(u, &mut buf);
        boundary += buf.iter().filter(|w| g.index_of(w).is_none()).count() as u64;
    }
    Ok(Ratio::new(boundary, g.num_vertices() as u64))
}

/// Result of a capped distance query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Exact(u32),
    /// The distance exceeds the cap.
    Censored,
}

/// Bidirectional breadth-first distance, censored above `cap`.
pub fn graph_distance(kernel: &Kernel, x: &Vertex, y: &Vertex, cap: u32) -> Result<Distance> {
    for v in [x, y] {
        kernel.validate(v)?;
        if !kernel.contains(v) {
            return Err(Error::OutsideHalfGraph(v.to_string()));
        }
    }
    if x == y {
        return Ok(Distance::Exact(0));
    }
    let mut dist = [FxHashMap::default(), FxHashMap::default()];
    dist[0].insert(x.clone(), 0u32);
    dist[1].insert(y.clone(), 0u32);
    let mut frontier = [vec![x.clone()], vec![y.clone()]];
    let mut radius = [0u32; 2];
    let mut buf = Vec::new();
    while radius[0] + radius[1] < cap {
        let side = if frontier[0].len() <= frontier[1].len() { 0 } else { 1 };
        if frontier[side].is_empty() {
            return Ok(Distance::Censored);
        }
        let other = 1 - side;
        let mut next = Vec::new();
        let mut best: Option<u32> = None;
        for v in std::mem::take(&mut frontier[side]) {
            buf.clear();
            kernel.push_neighbors(&v, &mut buf);
            for w in buf.drain(..) {
                if dist[side].contains_key(&w) {
                    continue;
                }
                if let Some(&d_other) = dist[other].get(&w) {
                    let total = radius[side] + 1 + d_other;
                    best = Some(best.map_or(total, |b| b.min(total)));
                }
                dist[side].insert(w.clone(), radius[side] + 1);
                next.push(w);
            }
        }
        radius[side] += 1;
        frontier[side] = next;
        if let Some(d) = best {
            return Ok(if d <= cap { Distance::Exact(d) } else { Distance::Censored });
        }
    }
    Ok(Distance::Censored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::{DlAddress, Family, HalfMode, TreeAddress};

    fn kern(f: Family) -> Kernel {
        Kernel::full(f).unwrap()
    }

    #[test]
    fn small_balls() {
        let tree = kern(Family::Tree { d: 2 });
        let o = tree.origin();
        let b0 = ball(&tree, &o, 0).unwrap();
        assert_eq!((b0.num_vertices(), b0.num_edges()), (1, 0));
        let b1 = ball(&tree, &o, 1).unwrap();
        assert_eq!((b1.num_vertices(), b1.num_edges()), (4, 3));
        let dl = kern(Family::Dl { alpha: 3, beta: 2 });
        let b = ball(&dl, &dl.origin(), 1).unwrap();
        assert_eq!((b.num_vertices(), b.num_edges()), (6, 5));
    }

    #[test]
    fn ball_limits() {
        let gp = kern(Family::Grandparent { d: 2 });
        assert!(matches!(ball(&gp, &gp.origin(), 13), Err(Error::RadiusTooLarge { .. })));
        assert!(matches!(
            ball_with_limits(&gp, &gp.origin(), 6, 12, 1000),
            Err(Error::BallTooLarge { .. })
        ));
    }

    #[test]
    fn boundary_ratio_examples() {
        let tree = kern(Family::Tree { d: 2 });
        let o = tree.origin();
        assert_eq!(boundary_ratio(&tree, &o, 0).unwrap(), Ratio::new(3, 1));
        assert_eq!(boundary_ratio(&tree, &o, 1).unwrap(), Ratio::new(6, 4));
    }

    #[test]
    fn distances() {
        let dl = kern(Family::Dl { alpha: 3, beta: 2 });
        let o = dl.origin();
        let x = Vertex::Dl(DlAddress::origin().down(0).down(0));
        assert_eq!(graph_distance(&dl, &o, &o, 5).unwrap(), Distance::Exact(0));
        let n = Vertex::Dl(DlAddress::origin().up(1));
        assert_eq!(graph_distance(&dl, &o, &n, 5).unwrap(), Distance::Exact(1));
        assert_eq!(graph_distance(&dl, &o, &x, 5).unwrap(), Distance::Exact(2));
        assert_eq!(graph_distance(&dl, &o, &x, 1).unwrap(), Distance::Censored);
        // same-level vertex reached by going up two levels and back down
        let y = Vertex::Dl(DlAddress::origin().up(0).up(0).down(2).down(1));
        assert_eq!(graph_distance(&dl, &o, &y, 10).unwrap(), Distance::Exact(4));
    }

    #[test]
    fn distance_to_grandparent_ancestors() {
        let gp = kern(Family::Grandparent { d: 2 });
        let o = TreeAddress::root();
        for m in 1..=6u64 {
            let a = Vertex::Tree(o.ancestor(m));
            let d = graph_distance(&gp, &Vertex::Tree(o.clone()), &a, 10).unwrap();
            assert_eq!(d, Distance::Exact(m.div_ceil(2) as u32));
        }
    }

    #[test]
    fn truncation_respects_window() {
        let dl = kern(Family::Dl { alpha: 3, beta: 2 });
        let g = Truncation::new(2, Some(-2), Some(1)).build(&dl, &dl.origin()).unwrap();
        assert!(g.levels.iter().all(|&l| (-2..=1).contains(&l)));
        assert_eq!(g.num_edges(), 16);
        let half = Kernel::new(Family::Tree { d: 2 }, HalfMode::DescendantsOfOrigin).unwrap();
        let h = Truncation::new(3, None, None).build(&half, &half.origin()).unwrap();
        assert_eq!(h.num_vertices(), 15);
    }
}

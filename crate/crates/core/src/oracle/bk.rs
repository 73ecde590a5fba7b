//! Disjoint occurrence of connection events on small graphs.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Signed;
use serde::Serialize;

use super::poly::ExactPoly;
use crate::error::{Error, Result};
use crate::graphs::{Family, FiniteSubgraph, Kernel, Truncation};

/// Most edges accepted by [`bk_disjoint`].
pub const MAX_BK_EDGES: usize = 16;

/// Plain finite graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SmallGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SmallGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Self {
        Self { n, edges }
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i)).collect())
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::path(n);
        g.edges.push((0, n - 1));
        g
    }

    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect())
    }
}

impl From<&FiniteSubgraph> for SmallGraph {
    fn from(g: &FiniteSubgraph) -> Self {
        Self::new(g.num_vertices(), g.edges.clone())
    }
}

/// Named pair of increasing events, each a list of vertex pairs that must
/// all be connected.
#[derive(Clone, Debug, Serialize)]
pub struct BkCase {
    pub name: String,
    pub graph: SmallGraph,
    pub a: Vec<(usize, usize)>,
    pub b: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BkResult {
    /// `P(A □ B)`.
    pub p_box: ExactPoly,
    pub p_a: ExactPoly,
    pub p_b: ExactPoly,
    /// `P(A □ B) <= P(A) P(B)` at `p = j/20`, `j = 0..=20`, exactly.
    pub holds_on_grid: bool,
    /// All Bernstein coefficients of `P(A) P(B) - P(A □ B)` are
    /// nonnegative, so the inequality holds on all of `[0, 1]`.
    pub certified: bool,
}

/// Grid used by [`BkResult::holds_on_grid`].
pub const BK_GRID: u32 = 20;

fn connected_all(g: &SmallGraph, open: u32, pairs: &[(usize, usize)]) -> bool {
    // Union-find over the open edges.
    let mut parent: Vec<usize> = (0..g.n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (e, &(u, v)) in g.edges.iter().enumerate() {
        if open >> e & 1 == 1 {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            parent[ru] = rv;
        }
    }
    pairs.iter().all(|&(u, v)| find(&mut parent, u) == find(&mut parent, v))
}

/// Exact `P(A □ B)`, `P(A)` and `P(B)` by checking every configuration for
/// disjoint witness edge sets.
pub fn bk_disjoint(g: &SmallGraph, a: &[(usize, usize)], b: &[(usize, usize)]) -> Result<BkResult> {
    let m = g.edges.len();
    if m > MAX_BK_EDGES {
        return Err(Error::SizeLimit { what: "event graph", edges: m, limit: MAX_BK_EDGES });
    }
    if let Some(&(u, v)) = a.iter().chain(b).find(|&&(u, v)| u >= g.n || v >= g.n) {
        return Err(Error::InvalidArgument(format!("pair ({u}, {v}) outside the graph")));
    }
    let full = 1u32 << m;
    let holds_a: Vec<bool> = (0..full).map(|s| connected_all(g, s, a)).collect();
    let holds_b: Vec<bool> = (0..full).map(|s| connected_all(g, s, b)).collect();
    let mut h_box = vec![0u64; m + 1];
    let mut h_a = vec![0u64; m + 1];
    let mut h_b = vec![0u64; m + 1];
    for w in 0..full {
        let j = w.count_ones() as usize;
        h_a[j] += holds_a[w as usize] as u64;
        h_b[j] += holds_b[w as usize] as u64;
        // Some witness K ⊆ w for A leaves w \ K witnessing B.
        let mut k = w;
        let boxed = loop {
            if holds_a[k as usize] && holds_b[(w & !k) as usize] {
                break true;
            }
            if k == 0 {
                break false;
            }
            k = (k - 1) & w;
        };
        h_box[j] += boxed as u64;
    }
    let poly = |h: &[u64]| ExactPoly::from_bernstein(&h.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>(), m);
    let (p_box, p_a, p_b) = (poly(&h_box), poly(&h_a), poly(&h_b));
    let gap = p_a.mul(&p_b).sub(&p_box);
    let holds_on_grid =
        (0..=BK_GRID).all(|j| !gap.eval(&BigRational::new(j.into(), BK_GRID.into())).is_negative());
    let certified = gap.bernstein(2 * m).iter().all(|c| !c.is_negative());
    Ok(BkResult { p_box, p_a, p_b, holds_on_grid, certified })
}

/// The ten event pairs checked by the test suite.
pub fn bk_library() -> Result<Vec<BkCase>> {
    let case = |name: &str, graph: SmallGraph, a: Vec<(usize, usize)>, b: Vec<(usize, usize)>| BkCase {
        name: name.into(),
        graph,
        a,
        b,
    };
    // Two adjacent levels of DL(3,2) around the origin: a copy of K_{2,3}.
    let dl = Kernel::full(Family::Dl { alpha: 3, beta: 2 })?;
    let window = Truncation::new(2, Some(0), Some(1)).build(&dl, &dl.origin())?;
    let o = window.origin;
    let others: Vec<usize> = (0..window.num_vertices()).filter(|&i| i != o).collect();
    let lower: Vec<usize> = others.iter().copied().filter(|&i| window.levels[i] == 1).collect();
    let peer = others.iter().copied().find(|&i| window.levels[i] == 0).expect("second top vertex");
    let dl_graph = SmallGraph::from(&window);

    Ok(vec![
        case("path3 consecutive edges", SmallGraph::path(3), vec![(0, 1)], vec![(1, 2)]),
        case("single edge twice", SmallGraph::path(2), vec![(0, 1)], vec![(0, 1)]),
        case("triangle shared corner", SmallGraph::cycle(3), vec![(0, 1)], vec![(0, 2)]),
        case("triangle same pair", SmallGraph::cycle(3), vec![(0, 1)], vec![(0, 1)]),
        case("square diagonals", SmallGraph::cycle(4), vec![(0, 2)], vec![(1, 3)]),
        case("square opposite sides", SmallGraph::cycle(4), vec![(0, 1)], vec![(2, 3)]),
        case("K4 disjoint pairs", SmallGraph::complete(4), vec![(0, 1)], vec![(2, 3)]),
        case("K4 two pairs vs one", SmallGraph::complete(4), vec![(0, 1), (2, 3)], vec![(0, 2)]),
        case("DL window two children", dl_graph.clone(), vec![(o, lower[0])], vec![(o, lower[1])]),
        case("DL window peer and child", dl_graph, vec![(o, peer)], vec![(peer, lower[2])]),
    ])
}

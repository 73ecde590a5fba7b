//! Lazy neighbor kernels for decorated trees, Diestel-Leader graphs and two
//! Cayley graphs of the lamplighter group.
//!
//! Nothing is materialized: a [`Kernel`] turns a [`Vertex`] into its list
//! of neighbors on demand, optionally restricted to a half-graph.

mod address;
mod ball;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub(crate) use address::put_varint;
pub use address::{DigitMap, DlAddress, LampElement, TreeAddress, Vertex};
pub use ball::{
    ball, ball_with_limits, boundary_ratio, graph_distance, Distance, FiniteSubgraph, Truncated, Truncation,
    DEFAULT_MAX_BALL_VERTICES, DEFAULT_MAX_RADIUS,
};

use crate::error::{Error, Result};

/// Graph family together with its parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Plain `(d+1)`-regular tree.
    Tree { d: u8 },
    /// Tree plus an edge from every vertex to its grandparent.
    Grandparent { d: u8 },
    /// Binary tree (`d = 2`) plus an edge between every pair of siblings.
    Triangles,
    /// Diestel-Leader graph, horocyclic product of `T_alpha` and `T_beta`.
    Dl { alpha: u8, beta: u8 },
    /// Lamplighter Cayley graph isomorphic to `DL(2, 2)`.
    LampDl,
    /// Lamplighter Cayley graph with generators "toggle" and "step".
    LampWalk,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Tree { .. } => "tree",
            Family::Grandparent { .. } => "grandparent",
            Family::Triangles => "triangles",
            Family::Dl { .. } => "dl",
            Family::LampDl => "lamp_dl",
            Family::LampWalk => "lamp_walk",
        }
    }

    /// Parameter string used in reports, e.g. `alpha=3;beta=2`.
    pub fn params(&self) -> String {
        match self {
            Family::Tree { d } | Family::Grandparent { d } => format!("d={d}"),
            Family::Triangles => "d=2".into(),
            Family::Dl { alpha, beta } => format!("alpha={alpha};beta={beta}"),
            Family::LampDl | Family::LampWalk => String::new(),
        }
    }

    pub fn is_tree_based(&self) -> bool {
        matches!(self, Family::Tree { .. } | Family::Grandparent { .. } | Family::Triangles)
    }

    pub fn is_lamplighter(&self) -> bool {
        matches!(self, Family::LampDl | Family::LampWalk)
    }

    /// Arity of the underlying tree for tree-based families.
    pub fn arity(&self) -> Option<u8> {
        match *self {
            Family::Tree { d } | Family::Grandparent { d } => Some(d),
            Family::Triangles => Some(2),
            _ => None,
        }
    }

    /// Maximal tree distance between the endpoints of an edge.
    pub fn span(&self) -> u32 {
        match self {
            Family::Grandparent { .. } | Family::Triangles => 2,
            _ => 1,
        }
    }

    /// Degree of every vertex in the full graph.
    pub fn degree(&self) -> usize {
        match *self {
            Family::Tree { d } => d as usize + 1,
            Family::Grandparent { d } => {
                let d = d as usize;
                2 + d + d * d
            }
            Family::Triangles => 4,
            Family::Dl { alpha, beta } => alpha as usize + beta as usize,
            Family::LampDl => 4,
            Family::LampWalk => 3,
        }
    }

    pub fn origin(&self) -> Vertex {
        match self {
            f if f.is_tree_based() => Vertex::Tree(TreeAddress::root()),
            Family::Dl { .. } => Vertex::Dl(DlAddress::origin()),
            _ => Vertex::Lamp(LampElement::identity()),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Tree { d } => write!(f, "tree({d})"),
            Family::Grandparent { d } => write!(f, "grandparent({d})"),
            Family::Triangles => write!(f, "triangles(2)"),
            Family::Dl { alpha, beta } => write!(f, "dl({alpha},{beta})"),
            Family::LampDl => write!(f, "lamp_dl"),
            Family::LampWalk => write!(f, "lamp_walk"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Parses `tree(2)`, `grandparent(3)`, `triangles`, `dl(3,2)`,
    /// `lamp_dl`, `lamp_walk`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.find('(') {
            Some(open) if s.ends_with(')') => (&s[..open], &s[open + 1..s.len() - 1]),
            Some(_) => return Err(Error::InvalidKernel(format!("cannot parse family {s:?}"))),
            None => (s, ""),
        };
        let nums: Vec<u8> = if args.trim().is_empty() {
            Vec::new()
        } else {
            args.split(',')
                .map(|a| a.trim().parse::<u8>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidKernel(format!("bad parameter in {s:?}: {e}")))?
        };
        let family = match (name.trim(), nums.as_slice()) {
            ("tree", [d]) => Family::Tree { d: *d },
            ("grandparent", [d]) => Family::Grandparent { d: *d },
            ("triangles", []) | ("triangles", [2]) => Family::Triangles,
            ("dl", [a, b]) => Family::Dl { alpha: *a, beta: *b },
            ("lamp_dl", []) => Family::LampDl,
            ("lamp_walk", []) => Family::LampWalk,
            _ => return Err(Error::InvalidKernel(format!("unknown family {s:?}"))),
        };
        Ok(family)
    }
}

/// Restriction of a family to an induced half-graph around its origin.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfMode {
    #[default]
    None,
    /// Downwards subtree of the origin (tree families) or vertices whose
    /// first projection descends from that of the origin (DL).
    DescendantsOfOrigin,
    /// Lamplighter confined to the non-negative half of the street.
    NonnegStreet,
    /// The Fibonacci tree `{v in G+ : R(v) <= position}`.
    Fibonacci,
}

impl HalfMode {
    pub fn name(&self) -> &'static str {
        match self {
            HalfMode::None => "none",
            HalfMode::DescendantsOfOrigin => "descendants_of_origin",
            HalfMode::NonnegStreet => "nonneg_street",
            HalfMode::Fibonacci => "fibonacci",
        }
    }
}

impl FromStr for HalfMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "none" | "" => HalfMode::None,
            "descendants_of_origin" => HalfMode::DescendantsOfOrigin,
            "nonneg_street" => HalfMode::NonnegStreet,
            "fibonacci" => HalfMode::Fibonacci,
            other => return Err(Error::InvalidKernel(format!("unknown half mode {other:?}"))),
        })
    }
}

/// Immutable description of a (half-)graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Kernel {
    pub family: Family,
    pub half: HalfMode,
}

const MAX_ARITY: u8 = 64;

impl Kernel {
    pub fn new(family: Family, half: HalfMode) -> Result<Self> {
        match family {
            Family::Tree { d } | Family::Grandparent { d } if !(2..=MAX_ARITY).contains(&d) => {
                return Err(Error::InvalidKernel(format!("tree arity must be in 2..={MAX_ARITY}, got {d}")));
            }
            Family::Dl { alpha, beta }
                if !(2..=MAX_ARITY).contains(&alpha) || !(2..=MAX_ARITY).contains(&beta) =>
            {
                return Err(Error::InvalidKernel(format!(
                    "DL parameters must be in 2..={MAX_ARITY}, got ({alpha},{beta})"
                )));
            }
            _ => {}
        }
        let compatible = match half {
            HalfMode::None => true,
            HalfMode::DescendantsOfOrigin => family.is_tree_based() || matches!(family, Family::Dl { .. }),
            HalfMode::NonnegStreet => family.is_lamplighter(),
            HalfMode::Fibonacci => family == Family::LampWalk,
        };
        if !compatible {
            return Err(Error::InvalidKernel(format!(
                "half mode {} is not available for {family}",
                half.name()
            )));
        }
        Ok(Self { family, half })
    }

    /// Full graph of the given family.
    pub fn full(family: Family) -> Result<Self> {
        Self::new(family, HalfMode::None)
    }

    pub fn origin(&self) -> Vertex {
        self.family.origin()
    }

    /// Checks that `v` is a well-formed vertex of this family.
    pub fn validate(&self, v: &Vertex) -> Result<()> {
        match (self.family, v) {
            (f, Vertex::Tree(t)) if f.is_tree_based() => t.validate(f.arity().unwrap()),
            (Family::Dl { alpha, beta }, Vertex::Dl(x)) => x.validate(alpha, beta),
            (f, Vertex::Lamp(_)) if f.is_lamplighter() => Ok(()),
            (f, v) => Err(Error::MalformedAddress(format!("{v} is not a vertex of {f}"))),
        }
    }

    /// Membership in the configured half-graph; always true without one.
    pub fn in_half(&self, v: &Vertex) -> Result<bool> {
        self.validate(v)?;
        Ok(self.contains(v))
    }

    /// Unchecked half-graph membership for a vertex already known to be valid.
    #[inline]
    pub(crate) fn contains(&self, v: &Vertex) -> bool {
        match (self.half, v) {
            (HalfMode::None, _) => true,
            (HalfMode::DescendantsOfOrigin, Vertex::Tree(t)) => {
                t.level >= 0 && t.digits.min_index().is_none_or(|i| i >= 1)
            }
            (HalfMode::DescendantsOfOrigin, Vertex::Dl(x)) => {
                x.level >= 0 && x.digits.min_index().is_none_or(|i| i >= 0)
            }
            (HalfMode::NonnegStreet, Vertex::Lamp(g)) => g.pos >= 0 && g.left_flag().is_none_or(|l| l >= 0),
            (HalfMode::Fibonacci, Vertex::Lamp(g)) => {
                g.pos >= 0
                    && g.left_flag().is_none_or(|l| l >= 0)
                    && g.right_flag().is_none_or(|r| r <= g.pos)
            }
            _ => false,
        }
    }

    /// Adjacent vertices inside the (half-)graph.
    pub fn neighbors(&self, v: &Vertex) -> Result<Vec<Vertex>> {
        self.validate(v)?;
        if !self.contains(v) {
            return Err(Error::OutsideHalfGraph(v.to_string()));
        }
        let mut out = Vec::with_capacity(self.family.degree());
        self.push_neighbors(v, &mut out);
        Ok(out)
    }

    /// Level function; see [`Vertex::level`].
    pub fn level(&self, v: &Vertex) -> i64 {
        v.level()
    }

    /// Appends neighbors of a valid in-graph vertex without checking it.
    pub(crate) fn push_neighbors(&self, v: &Vertex, out: &mut Vec<Vertex>) {
        let start = out.len();
        match (self.family, v) {
            (Family::Tree { d }, Vertex::Tree(t)) => {
                out.push(Vertex::Tree(t.parent()));
                out.extend((0..d).map(|c| Vertex::Tree(t.child(c))));
            }
            (Family::Grandparent { d }, Vertex::Tree(t)) => {
                let parent = t.parent();
                out.push(Vertex::Tree(parent.parent()));
                out.push(Vertex::Tree(parent));
                for c in 0..d {
                    let child = t.child(c);
                    out.extend((0..d).map(|g| Vertex::Tree(child.child(g))));
                    out.push(Vertex::Tree(child));
                }
            }
            (Family::Triangles, Vertex::Tree(t)) => {
                let parent = t.parent();
                let own = t.own_digit();
                out.push(Vertex::Tree(parent.child(1 - own)));
                out.push(Vertex::Tree(parent));
                out.extend((0..2).map(|c| Vertex::Tree(t.child(c))));
            }
            (Family::Dl { alpha, beta }, Vertex::Dl(x)) => {
                out.extend((0..beta).map(|b| Vertex::Dl(x.up(b))));
                out.extend((0..alpha).map(|c| Vertex::Dl(x.down(c))));
            }
            (Family::LampDl, Vertex::Lamp(g)) => {
                // g·(1,{0}), g·(1,∅) and their inverses g·(-1,{-1}), g·(-1,∅)
                out.push(Vertex::Lamp(g.moved(-1)));
                out.push(Vertex::Lamp(g.toggled(g.pos - 1).moved(-1)));
                out.push(Vertex::Lamp(g.moved(1)));
                out.push(Vertex::Lamp(g.toggled(g.pos).moved(1)));
            }
            (Family::LampWalk, Vertex::Lamp(g)) => {
                out.push(Vertex::Lamp(g.moved(-1)));
                out.push(Vertex::Lamp(g.toggled(g.pos)));
                out.push(Vertex::Lamp(g.moved(1)));
            }
            _ => {}
        }
        if self.half != HalfMode::None {
            let mut i = start;
            while i < out.len() {
                if self.contains(&out[i]) {
                    i += 1;
                } else {
                    out.swap_remove(i);
                }
            }
            out[start..].sort_unstable();
        }
    }

    /// Vertices of the downwards subtree `S_v` within `depth` levels of `v`
    /// (tree-based families only).
    pub fn subtree_layers(&self, v: &TreeAddress, depth: u32) -> Vec<TreeAddress> {
        let d = self.family.arity().unwrap_or(0);
        let mut layer = vec![v.clone()];
        let mut all = layer.clone();
        for _ in 0..depth {
            layer = layer.iter().flat_map(|u| (0..d).map(move |c| u.child(c))).collect();
            all.extend(layer.iter().cloned());
        }
        all
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.half == HalfMode::None {
            write!(f, "{}", self.family)
        } else {
            write!(f, "{}[{}]", self.family, self.half.name())
        }
    }
}

/// Projection of a DL vertex to the first tree.
pub fn pi1(v: &Vertex) -> Result<TreeAddress> {
    v.as_dl()
        .map(DlAddress::pi1)
        .ok_or_else(|| Error::WrongFamily { expected: "a DL vertex", got: v.to_string() })
}

/// Projection of a DL vertex to the second tree.
pub fn pi2(v: &Vertex) -> Result<TreeAddress> {
    v.as_dl()
        .map(DlAddress::pi2)
        .ok_or_else(|| Error::WrongFamily { expected: "a DL vertex", got: v.to_string() })
}

/// Identifies a lamplighter element with a vertex of `DL(2, 2)`.
///
/// Lamp `x` is lit exactly when the digit at index `x` is 1; the lamplighter
/// position is the level.
pub fn dl_of_lamp(g: &LampElement) -> DlAddress {
    DlAddress { level: g.pos, digits: DigitMap::from_pairs(g.lamps().iter().map(|&x| (x, 1))) }
}

/// Inverse of [`dl_of_lamp`].
pub fn lamp_of_dl(v: &DlAddress) -> Result<LampElement> {
    v.validate(2, 2)?;
    Ok(LampElement::new(v.level, v.digits.iter().map(|(i, _)| i)))
}

/// Whether [`dl_of_lamp`] maps the radius-`r` ball of `lamp_dl` onto the
/// radius-`r` ball of `DL(2, 2)` as a graph isomorphism.
pub fn lamp_isomorphism_holds(r: u32) -> Result<bool> {
    let lamp = Kernel::full(Family::LampDl)?;
    let dl = Kernel::full(Family::Dl { alpha: 2, beta: 2 })?;
    let a = ball(&lamp, &lamp.origin(), r)?;
    let b = ball(&dl, &dl.origin(), r)?;
    if a.num_vertices() != b.num_vertices() || a.num_edges() != b.num_edges() {
        return Ok(false);
    }
    let mut image = Vec::with_capacity(a.num_vertices());
    for v in &a.vertices {
        let Vertex::Lamp(g) = v else { return Ok(false) };
        match b.index_of(&Vertex::Dl(dl_of_lamp(g))) {
            Some(i) => image.push(i),
            None => return Ok(false),
        }
    }
    let mut seen = vec![false; b.num_vertices()];
    for &i in &image {
        if std::mem::replace(&mut seen[i], true) {
            return Ok(false);
        }
    }
    // Equal edge counts make an injective edge map a bijection.
    Ok(a.edges.iter().all(|&(i, j)| b.edge_index(image[i], image[j]).is_some()))
}

/// Ball of the Fibonacci tree around its root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FibonacciBall {
    /// Vertices at each distance from the root.
    pub counts: Vec<u64>,
    pub vertices: usize,
    pub edges: usize,
}

impl FibonacciBall {
    /// `|V| = |E| + 1` for the connected ball.
    pub fn is_tree(&self) -> bool {
        self.vertices == self.edges + 1
    }

    /// `count(n) = count(n-1) + count(n-2)` for `n >= 3`.
    pub fn follows_recurrence(&self) -> bool {
        (3..self.counts.len()).all(|n| self.counts[n] == self.counts[n - 1] + self.counts[n - 2])
    }
}

/// Enumerates the Fibonacci tree of `lamp_walk` to distance `depth`.
pub fn fibonacci_ball(depth: u32) -> Result<FibonacciBall> {
    let kernel = Kernel::new(Family::LampWalk, HalfMode::Fibonacci)?;
    let g = ball(&kernel, &kernel.origin(), depth)?;
    let adj = g.adjacency();
    let mut dist = vec![u32::MAX; g.num_vertices()];
    dist[g.origin] = 0;
    let mut queue = std::collections::VecDeque::from([g.origin]);
    while let Some(i) = queue.pop_front() {
        for &(j, _) in &adj[i] {
            if dist[j] == u32::MAX {
                dist[j] = dist[i] + 1;
                queue.push_back(j);
            }
        }
    }
    let mut counts = vec![0u64; depth as usize + 1];
    for d in dist {
        counts[d as usize] += 1;
    }
    Ok(FibonacciBall { counts, vertices: g.num_vertices(), edges: g.num_edges() })
}

/// Something that can be explored: a kernel, possibly cut down to a finite
/// region, together with a distinguished start vertex.
pub trait Lattice: Sync {
    fn kernel(&self) -> &Kernel;

    fn origin(&self) -> Vertex;

    /// Appends the neighbors of `v`; `v` is assumed valid and inside.
    fn push_neighbors(&self, v: &Vertex, out: &mut Vec<Vertex>);

    /// Whether `v` belongs to the lattice.
    fn contains(&self, v: &Vertex) -> bool;
}

/// A lattice explored from a start vertex other than its default origin.
#[derive(Clone, Debug)]
pub struct Rooted<L> {
    inner: L,
    root: Vertex,
}

impl<L: Lattice> Rooted<L> {
    pub fn new(inner: L, root: Vertex) -> Result<Self> {
        inner.kernel().validate(&root)?;
        if !inner.contains(&root) {
            return Err(Error::OutsideHalfGraph(root.to_string()));
        }
        Ok(Self { inner, root })
    }
}

impl<L: Lattice> Lattice for Rooted<L> {
    fn kernel(&self) -> &Kernel {
        self.inner.kernel()
    }

    fn origin(&self) -> Vertex {
        self.root.clone()
    }

    fn push_neighbors(&self, v: &Vertex, out: &mut Vec<Vertex>) {
        self.inner.push_neighbors(v, out)
    }

    fn contains(&self, v: &Vertex) -> bool {
        self.inner.contains(v)
    }
}

impl Lattice for Kernel {
    fn kernel(&self) -> &Kernel {
        self
    }

    fn origin(&self) -> Vertex {
        Kernel::origin(self)
    }

    fn push_neighbors(&self, v: &Vertex, out: &mut Vec<Vertex>) {
        Kernel::push_neighbors(self, v, out)
    }

    fn contains(&self, v: &Vertex) -> bool {
        self.validate(v).is_ok() && Kernel::contains(self, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(f: Family) -> Kernel {
        Kernel::full(f).unwrap()
    }

    #[test]
    fn degrees_match_examples() {
        let o = Vertex::Tree(TreeAddress::root());
        assert_eq!(k(Family::Grandparent { d: 2 }).neighbors(&o).unwrap().len(), 8);
        assert_eq!(k(Family::Triangles).neighbors(&o).unwrap().len(), 4);
        assert_eq!(k(Family::Tree { d: 2 }).neighbors(&o).unwrap().len(), 3);
        let x = Vertex::Dl(DlAddress::origin().up(1).down(2));
        assert_eq!(k(Family::Dl { alpha: 3, beta: 2 }).neighbors(&x).unwrap().len(), 5);
        let g = Vertex::Lamp(LampElement::new(2, [0, 5]));
        assert_eq!(k(Family::LampDl).neighbors(&g).unwrap().len(), 4);
        assert_eq!(k(Family::LampWalk).neighbors(&g).unwrap().len(), 3);
    }

    #[test]
    fn decoration_level_gaps() {
        let kern = k(Family::Grandparent { d: 2 });
        let v = Vertex::Tree(TreeAddress::root().child(1).child(0));
        let gaps: Vec<i64> = kern.neighbors(&v).unwrap().iter().map(|u| u.level() - v.level()).collect();
        assert_eq!(gaps.iter().filter(|&&g| g == -2).count(), 1);
        assert_eq!(gaps.iter().filter(|&&g| g == 2).count(), 4);
        let tri = k(Family::Triangles);
        let sib: Vec<_> = tri.neighbors(&v).unwrap().into_iter().filter(|u| u.level() == v.level()).collect();
        assert_eq!(sib, vec![Vertex::Tree(TreeAddress::root().child(1).child(1))]);
    }

    #[test]
    fn half_mode_membership_examples() {
        let gplus = Kernel::new(Family::LampWalk, HalfMode::NonnegStreet).unwrap();
        assert!(gplus.in_half(&LampElement::new(3, [1, 2]).into()).unwrap());
        assert!(!gplus.in_half(&LampElement::new(3, [-1]).into()).unwrap());
        let fib = Kernel::new(Family::LampWalk, HalfMode::Fibonacci).unwrap();
        assert!(fib.in_half(&LampElement::new(2, [1]).into()).unwrap());
        assert!(!fib.in_half(&LampElement::new(1, [2]).into()).unwrap());
        let so = Kernel::new(Family::Tree { d: 2 }, HalfMode::DescendantsOfOrigin).unwrap();
        let o = TreeAddress::root();
        assert!(so.in_half(&o.child(0).into()).unwrap());
        let sibling = o.parent().child(1);
        assert!(!so.in_half(&sibling.into()).unwrap());
        let dl = Kernel::new(Family::Dl { alpha: 3, beta: 2 }, HalfMode::DescendantsOfOrigin).unwrap();
        assert!(dl.in_half(&DlAddress::origin().down(2).up(1).into()).unwrap());
        assert!(!dl.in_half(&DlAddress::origin().up(1).down(1).into()).unwrap());
    }

    #[test]
    fn incompatible_half_modes_rejected() {
        assert!(Kernel::new(Family::LampDl, HalfMode::Fibonacci).is_err());
        assert!(Kernel::new(Family::Tree { d: 2 }, HalfMode::NonnegStreet).is_err());
        assert!(Kernel::new(Family::LampWalk, HalfMode::DescendantsOfOrigin).is_err());
        assert!(Kernel::new(Family::Dl { alpha: 1, beta: 2 }, HalfMode::None).is_err());
        assert!(Kernel::new(Family::Tree { d: 1 }, HalfMode::None).is_err());
    }

    #[test]
    fn malformed_addresses_rejected() {
        let kern = k(Family::Dl { alpha: 3, beta: 2 });
        let bad = Vertex::Dl(DlAddress { level: 0, digits: DigitMap::from_pairs([(0, 2)]) });
        assert!(matches!(kern.neighbors(&bad), Err(Error::MalformedAddress(_))));
        let tree = k(Family::Tree { d: 2 });
        let above = Vertex::Tree(TreeAddress { level: 0, digits: DigitMap::from_pairs([(1, 1)]) });
        assert!(tree.neighbors(&above).is_err());
        assert!(tree.neighbors(&Vertex::Lamp(LampElement::identity())).is_err());
    }

    #[test]
    fn pi_projections_reject_other_families() {
        assert!(pi1(&Vertex::Tree(TreeAddress::root())).is_err());
        let o = Vertex::Dl(DlAddress::origin());
        assert_eq!(pi1(&o).unwrap(), TreeAddress::root());
        assert_eq!(pi2(&o).unwrap(), TreeAddress::root());
    }

    #[test]
    fn family_parsing() {
        assert_eq!("dl(3,2)".parse::<Family>().unwrap(), Family::Dl { alpha: 3, beta: 2 });
        assert_eq!("grandparent(2)".parse::<Family>().unwrap(), Family::Grandparent { d: 2 });
        assert_eq!("lamp_walk".parse::<Family>().unwrap(), Family::LampWalk);
        assert!("dl(3)".parse::<Family>().is_err());
        for f in ["tree(3)", "triangles(2)", "dl(6,2)", "lamp_dl"] {
            assert_eq!(f.parse::<Family>().unwrap().to_string(), f);
        }
    }

    #[test]
    fn dl_of_lamp_examples() {
        assert_eq!(dl_of_lamp(&LampElement::identity()), DlAddress::origin());
        let g = LampElement::new(-2, [-5, 0, 4]);
        assert_eq!(lamp_of_dl(&dl_of_lamp(&g)).unwrap(), g);
    }

    #[test]
    fn lamp_isomorphism_on_small_balls() {
        for r in 0..=3 {
            assert!(lamp_isomorphism_holds(r).unwrap());
        }
    }

    #[test]
    fn fibonacci_counts() {
        let f = fibonacci_ball(6).unwrap();
        assert_eq!(f.counts, [1, 2, 3, 5, 8, 13, 21]);
        assert!(f.is_tree() && f.follows_recurrence());
    }
}

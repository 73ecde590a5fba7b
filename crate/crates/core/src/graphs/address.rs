//! Canonical finite addresses for vertices of the lazily generated graphs.
//!
//! Every vertex is a level together with a finitely supported map from
//! integer indices to small digits. Zero digits are never stored, so two
//! addresses are equal exactly when their fields are equal.

use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Finitely supported map `index -> digit` with zero digits suppressed.
///
/// Entries are kept sorted by index.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DigitMap(SmallVec<[(i64, u8); 6]>);

impl DigitMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a map from arbitrary pairs; zero digits are dropped and later
    /// duplicates win.
    pub fn from_pairs<I: IntoIterator<Item = (i64, u8)>>(pairs: I) -> Self {
        let mut map = Self::new();
        for (i, d) in pairs {
            map.set(i, d);
        }
        map
    }

    pub fn get(&self, index: i64) -> u8 {
        match self.0.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.0[pos].1,
            Err(_) => 0,
        }
    }

    pub fn set(&mut self, index: i64, digit: u8) {
        match self.0.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => {
                if digit == 0 {
                    self.0.remove(pos);
                } else {
                    self.0[pos].1 = digit;
                }
            }
            Err(pos) => {
                if digit != 0 {
                    self.0.insert(pos, (index, digit));
                }
            }
        }
    }

    /// Drops every entry with index strictly greater than `bound`.
    pub fn truncate_above(&mut self, bound: i64) {
        let keep = self.0.partition_point(|&(i, _)| i <= bound);
        self.0.truncate(keep);
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u8)> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_index(&self) -> Option<i64> {
        self.0.first().map(|&(i, _)| i)
    }

    pub fn max_index(&self) -> Option<i64> {
        self.0.last().map(|&(i, _)| i)
    }

    /// True when the entries with index `<= bound` coincide with `other`
    /// and `other` has nothing above `bound`.
    fn prefix_equals(&self, bound: i64, other: &DigitMap) -> bool {
        let keep = self.0.partition_point(|&(i, _)| i <= bound);
        self.0[..keep] == other.0[..]
    }
}

impl fmt::Debug for DigitMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.0.iter().map(|(i, d)| (i, d))).finish()
    }
}

/// Vertex of an oriented `(d+1)`-regular tree with a distinguished end.
///
/// `digits[j]` labels the edge between the ancestors at levels `j` and
/// `j - 1` on the upward ray, so every stored index is `<= level`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeAddress {
    pub level: i64,
    pub digits: DigitMap,
}

impl TreeAddress {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn parent(&self) -> Self {
        let mut digits = self.digits.clone();
        digits.truncate_above(self.level - 1);
        Self { level: self.level - 1, digits }
    }

    pub fn child(&self, c: u8) -> Self {
        let mut digits = self.digits.clone();
        digits.set(self.level + 1, c);
        Self { level: self.level + 1, digits }
    }

    /// Ancestor `t` levels above.
    pub fn ancestor(&self, t: u64) -> Self {
        let level = self.level - t as i64;
        let mut digits = self.digits.clone();
        digits.truncate_above(level);
        Self { level, digits }
    }

    /// Digit of the edge from this vertex up to its parent.
    pub fn own_digit(&self) -> u8 {
        self.digits.get(self.level)
    }

    pub fn is_descendant_of(&self, other: &TreeAddress) -> bool {
        self.level >= other.level && self.digits.prefix_equals(other.level, &other.digits)
    }

    /// Level of the deepest common ancestor of `self` and `other`.
    pub fn meet_level(&self, other: &TreeAddress) -> i64 {
        let mut m = self.level.min(other.level);
        let (a, b) = (&self.digits.0, &other.digits.0);
        let (mut i, mut j) = (0, 0);
        // First index <= m where the two upward rays disagree.
        loop {
            let x = a.get(i).filter(|e| e.0 <= m);
            let y = b.get(j).filter(|e| e.0 <= m);
            let diff = match (x, y) {
                (None, None) => break,
                (Some(&(p, _)), None) => p,
                (None, Some(&(q, _))) => q,
                (Some(&(p, dp)), Some(&(q, dq))) => {
                    if p == q && dp == dq {
                        i += 1;
                        j += 1;
                        continue;
                    }
                    p.min(q)
                }
            };
            m = diff - 1;
            break;
        }
        m
    }

    pub fn validate(&self, d: u8) -> Result<()> {
        for (i, digit) in self.digits.iter() {
            if i > self.level || digit >= d {
                return Err(Error::MalformedAddress(format!(
                    "tree digit {digit} at index {i} (level {}, arity {d})",
                    self.level
                )));
            }
        }
        Ok(())
    }
}

/// Vertex of the Diestel-Leader graph `DL(alpha, beta)`.
///
/// Indices below `level` carry digits of the `alpha`-ary tree and indices at
/// or above `level` carry digits of the `beta`-ary tree. A down-move writes
/// an `alpha`-digit at index `level`; an up-move writes a `beta`-digit at
/// index `level - 1`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DlAddress {
    pub level: i64,
    pub digits: DigitMap,
}

impl DlAddress {
    pub fn origin() -> Self {
        Self::default()
    }

    pub fn down(&self, c: u8) -> Self {
        let mut digits = self.digits.clone();
        digits.set(self.level, c);
        Self { level: self.level + 1, digits }
    }

    pub fn up(&self, b: u8) -> Self {
        let mut digits = self.digits.clone();
        digits.set(self.level - 1, b);
        Self { level: self.level - 1, digits }
    }

    /// Projection to the `alpha`-ary tree.
    pub fn pi1(&self) -> TreeAddress {
        let digits = DigitMap::from_pairs(
            self.digits.iter().filter(|&(i, _)| i < self.level).map(|(i, d)| (i + 1, d)),
        );
        TreeAddress { level: self.level, digits }
    }

    /// Projection to the `beta`-ary tree, whose level is `-level`.
    pub fn pi2(&self) -> TreeAddress {
        let digits = DigitMap::from_pairs(
            self.digits.iter().filter(|&(i, _)| i >= self.level).map(|(i, d)| (-i, d)),
        );
        TreeAddress { level: -self.level, digits }
    }

    pub fn validate(&self, alpha: u8, beta: u8) -> Result<()> {
        for (i, digit) in self.digits.iter() {
            let bound = if i < self.level { alpha } else { beta };
            if digit >= bound {
                return Err(Error::MalformedAddress(format!(
                    "DL digit {digit} at index {i} exceeds alphabet {bound} (level {})",
                    self.level
                )));
            }
        }
        Ok(())
    }
}

/// Element `(pos, lamps)` of the lamplighter group `Z ⋉ ⊕_Z Z_2`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LampElement {
    pub pos: i64,
    lamps: SmallVec<[i64; 6]>,
}

impl LampElement {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new<I: IntoIterator<Item = i64>>(pos: i64, lamps: I) -> Self {
        let mut lit: SmallVec<[i64; 6]> = SmallVec::new();
        for x in lamps {
            toggle(&mut lit, x);
        }
        Self { pos, lamps: lit }
    }

    pub fn lamps(&self) -> &[i64] {
        &self.lamps
    }

    pub fn is_lit(&self, x: i64) -> bool {
        self.lamps.binary_search(&x).is_ok()
    }

    /// Group law `(j, F)·(j', F') = (j + j', F △ (j + F'))`.
    pub fn mul(&self, other: &LampElement) -> LampElement {
        let mut lamps = self.lamps.clone();
        for &x in &other.lamps {
            toggle(&mut lamps, self.pos + x);
        }
        LampElement { pos: self.pos + other.pos, lamps }
    }

    pub fn inv(&self) -> LampElement {
        LampElement {
            pos: -self.pos,
            lamps: self.lamps.iter().map(|&x| x - self.pos).collect(),
        }
    }

    pub fn toggled(&self, x: i64) -> LampElement {
        let mut lamps = self.lamps.clone();
        toggle(&mut lamps, x);
        LampElement { pos: self.pos, lamps }
    }

    pub fn moved(&self, step: i64) -> LampElement {
        LampElement { pos: self.pos + step, lamps: self.lamps.clone() }
    }

    /// Left flag `min F`, `None` standing for `+∞`.
    pub fn left_flag(&self) -> Option<i64> {
        self.lamps.first().copied()
    }

    /// Right flag `max F`, `None` standing for `-∞`.
    pub fn right_flag(&self) -> Option<i64> {
        self.lamps.last().copied()
    }
}

fn toggle(lamps: &mut SmallVec<[i64; 6]>, x: i64) {
    match lamps.binary_search(&x) {
        Ok(pos) => {
            lamps.remove(pos);
        }
        Err(pos) => lamps.insert(pos, x),
    }
}

/// A vertex of any supported family.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vertex {
    Tree(TreeAddress),
    Dl(DlAddress),
    Lamp(LampElement),
}

impl Vertex {
    /// Level (tree depth, DL level `ℓ1∘π1`, or lamplighter position).
    #[inline]
    pub fn level(&self) -> i64 {
        match self {
            Vertex::Tree(t) => t.level,
            Vertex::Dl(v) => v.level,
            Vertex::Lamp(g) => g.pos,
        }
    }

    pub fn as_tree(&self) -> Option<&TreeAddress> {
        match self {
            Vertex::Tree(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_dl(&self) -> Option<&DlAddress> {
        match self {
            Vertex::Dl(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_lamp(&self) -> Option<&LampElement> {
        match self {
            Vertex::Lamp(g) => Some(g),
            _ => None,
        }
    }

    /// Appends the canonical serialization to `out`.
    ///
    /// Layout: one tag byte (`0x01` tree, `0x02` DL, `0x03` lamplighter),
    /// the level as a zig-zag LEB128 varint, the number of entries as an
    /// unsigned LEB128 varint, then each entry in increasing index order as
    /// a zig-zag varint index followed by an unsigned varint digit. Lit
    /// lamps are written as entries with digit 1.
    pub fn encode_into(&self, out: &mut impl Extend<u8>) {
        match self {
            Vertex::Tree(t) => encode_parts(out, TAG_TREE, t.level, t.digits.len(), t.digits.iter()),
            Vertex::Dl(v) => encode_parts(out, TAG_DL, v.level, v.digits.len(), v.digits.iter()),
            Vertex::Lamp(g) => {
                encode_parts(out, TAG_LAMP, g.pos, g.lamps.len(), g.lamps.iter().map(|&x| (x, 1)))
            }
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.encode_into(&mut out);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Vertex> {
        let mut cursor = Cursor { bytes, pos: 0 };
        let tag = cursor.byte()?;
        let level = unzigzag(cursor.varint()?);
        let len = cursor.varint()? as usize;
        let mut entries = Vec::with_capacity(len.min(64));
        let mut last: Option<i64> = None;
        for _ in 0..len {
            let index = unzigzag(cursor.varint()?);
            let digit = cursor.varint()?;
            if last.is_some_and(|l| l >= index) {
                return Err(Error::MalformedAddress("entries not strictly increasing".into()));
            }
            if digit == 0 || digit > u8::MAX as u64 {
                return Err(Error::MalformedAddress(format!("bad digit {digit}")));
            }
            last = Some(index);
            entries.push((index, digit as u8));
        }
        if cursor.pos != bytes.len() {
            return Err(Error::MalformedAddress("trailing bytes".into()));
        }
        match tag {
            TAG_TREE => Ok(Vertex::Tree(TreeAddress { level, digits: DigitMap::from_pairs(entries) })),
            TAG_DL => Ok(Vertex::Dl(DlAddress { level, digits: DigitMap::from_pairs(entries) })),
            TAG_LAMP => {
                if entries.iter().any(|&(_, d)| d != 1) {
                    return Err(Error::MalformedAddress("lamp digit must be 1".into()));
                }
                Ok(Vertex::Lamp(LampElement::new(level, entries.into_iter().map(|(i, _)| i))))
            }
            other => Err(Error::MalformedAddress(format!("unknown tag {other:#04x}"))),
        }
    }
}

impl From<TreeAddress> for Vertex {
    fn from(t: TreeAddress) -> Self {
        Vertex::Tree(t)
    }
}

impl From<DlAddress> for Vertex {
    fn from(v: DlAddress) -> Self {
        Vertex::Dl(v)
    }
}

impl From<LampElement> for Vertex {
    fn from(g: LampElement) -> Self {
        Vertex::Lamp(g)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, level, entries): (&str, i64, Vec<(i64, u8)>) = match self {
            Vertex::Tree(t) => ("T", t.level, t.digits.iter().collect()),
            Vertex::Dl(v) => ("DL", v.level, v.digits.iter().collect()),
            Vertex::Lamp(g) => ("L", g.pos, g.lamps.iter().map(|&x| (x, 1)).collect()),
        };
        write!(f, "{name}({level};")?;
        for (n, (i, d)) in entries.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}:{d}")?;
        }
        write!(f, ")")
    }
}

const TAG_TREE: u8 = 0x01;
const TAG_DL: u8 = 0x02;
const TAG_LAMP: u8 = 0x03;

fn encode_parts(
    out: &mut impl Extend<u8>,
    tag: u8,
    level: i64,
    len: usize,
    entries: impl Iterator<Item = (i64, u8)>,
) {
    out.extend([tag]);
    put_varint(out, zigzag(level));
    put_varint(out, len as u64);
    for (i, d) in entries {
        put_varint(out, zigzag(i));
        put_varint(out, d as u64);
    }
}

#[inline]
fn zigzag(x: i64) -> u64 {
    ((x << 1) ^ (x >> 63)) as u64
}

#[inline]
fn unzigzag(x: u64) -> i64 {
    ((x >> 1) as i64) ^ -((x & 1) as i64)
}

#[inline]
pub(crate) fn put_varint(out: &mut impl Extend<u8>, mut x: u64) {
    while x >= 0x80 {
        out.extend([(x as u8) | 0x80]);
        x >>= 7;
    }
    out.extend([x as u8]);
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn byte(&mut self) -> Result<u8> {
        let b = *self
            .bytes
            .get(self.pos)
            .ok_or_else(|| Error::MalformedAddress("truncated encoding".into()))?;
        self.pos += 1;
        Ok(b)
    }

    fn varint(&mut self) -> Result<u64> {
        let mut x = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.byte()?;
            x |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
        }
        Err(Error::MalformedAddress("varint too long".into()))
    }
}

//! Monte Carlo estimation over independent replicas, critical-point
//! bisection and exponential decay fits.
//!
//! Replica `i` uses the edge seed `derive_seed(master_seed, i)` at every
//! `p`, so estimates at different densities are coupled. Per-replica values
//! are integers and are merged with exact integer accumulators; results do
//! not depend on the worker count.

mod fit;
mod pc;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

pub use fit::{fit_decay, DecayFit};
pub use pc::{pc_crossing, pc_survival, PcEstimate, PcMethod, Probe, SurvivalTarget};

use crate::error::{Error, Result};
use crate::graphs::{Family, Lattice, TreeAddress, Vertex};
use crate::perc::{
    ascent, band_occupancy, connections, derive_seed, forward_profile, full_profile, isolated_height, upward_profile,
    EdgeSampler, ProfileMode, DEFAULT_BUDGET,
};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "PERCLAB_WORKERS";

/// Worker count from [`WORKERS_ENV`], defaulting to one.
pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV).ok().and_then(|s| s.trim().parse().ok()).filter(|&w| w >= 1).unwrap_or(1)
}

/// Replica count, master seed, per-replica budget and worker count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub n: u64,
    pub seed: u64,
    pub budget: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(n: u64, seed: u64) -> Self {
        Self { n, seed, budget: DEFAULT_BUDGET, workers: default_workers() }
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    pub fn with_n(mut self, n: u64) -> Self {
        self.n = n;
        self
    }

    pub(crate) fn sampler(&self, i: u64, p: f64) -> EdgeSampler {
        EdgeSampler::new(derive_seed(self.seed, i), p)
    }
}

/// Sample mean and standard error.
///
/// `n` counts all replicas; the mean and `stderr = sd / √(n - n_censored)`
/// are taken over the replicas that were not censored.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub n_censored: u64,
}

impl MCEstimate {
    /// A noiseless value, e.g. for synthetic fits.
    pub fn exact(value: f64) -> Self {
        Self { mean: value, stderr: 0.0, n: 1, n_censored: 0 }
    }

    pub fn n_used(&self) -> u64 {
        self.n - self.n_censored
    }

    /// Whether `mean <= bound + z * stderr`.
    pub fn within_upper(&self, bound: f64, z: f64) -> bool {
        self.mean <= bound + z * self.stderr
    }

    /// Whether `|mean - value| <= z * stderr`.
    pub fn agrees_with(&self, value: f64, z: f64) -> bool {
        (self.mean - value).abs() <= z * self.stderr
    }
}

/// Exact running sums of integer replica values.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Accumulator {
    pub n: u64,
    pub sum: u128,
    pub sum_sq: u128,
    pub censored: u64,
}

impl Accumulator {
    #[inline]
    pub fn push(&mut self, value: Option<u64>) {
        self.n += 1;
        match value {
            Some(x) => {
                self.sum += x as u128;
                self.sum_sq += (x as u128) * (x as u128);
            }
            None => self.censored += 1,
        }
    }

    pub fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self.censored += other.censored;
    }

    pub fn used(&self) -> u64 {
        self.n - self.censored
    }

    pub fn estimate(&self) -> Result<MCEstimate> {
        let m = self.used();
        if m == 0 {
            return Err(Error::Estimation(format!("all {} replicas censored", self.n)));
        }
        let mean = self.sum as f64 / m as f64;
        let stderr = if m < 2 {
            0.0
        } else {
            // Centered sum of squares, exact in integers as m·Σx² - (Σx)².
            let centered = m as u128 * self.sum_sq - self.sum * self.sum;
            let var = centered as f64 / (m as f64 * (m - 1) as f64);
            (var / m as f64).sqrt()
        };
        Ok(MCEstimate { mean, stderr, n: self.n, n_censored: self.censored })
    }
}

/// Runs `f(i, accs)` for every replica `i` in `range`, merging per-worker
/// accumulators of the given width.
///
/// Replicas are split into contiguous chunks, one per worker. The first
/// error in replica order wins.
pub(crate) fn run_range<F>(range: std::ops::Range<u64>, workers: usize, width: usize, f: F) -> Result<Vec<Accumulator>>
where
    F: Fn(u64, &mut [Accumulator]) -> Result<()> + Sync,
{
    let len = range.end.saturating_sub(range.start);
    let workers = (workers.max(1) as u64).min(len.max(1));
    let chunk = |w: u64| range.start + len * w / workers..range.start + len * (w + 1) / workers;
    let work = |r: std::ops::Range<u64>| -> Result<Vec<Accumulator>> {
        let mut accs = vec![Accumulator::default(); width];
        for i in r {
            f(i, &mut accs)?;
        }
        Ok(accs)
    };
    let parts: Vec<Result<Vec<Accumulator>>> = if workers == 1 {
        vec![work(range.clone())]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers).map(|w| s.spawn(move || work(chunk(w)))).collect();
            handles.into_iter().map(|h| h.join().expect("replica worker panicked")).collect()
        })
    };
    let mut total = vec![Accumulator::default(); width];
    for part in parts {
        for (t, a) in total.iter_mut().zip(&part?) {
            t.merge(a);
        }
    }
    Ok(total)
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p must lie in [0, 1], got {p}")));
    }
    Ok(())
}

fn check_n(n: u64) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 replicas, got {n}")));
    }
    Ok(())
}

/// Observable of a single replica, measured from the lattice origin.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Statistic {
    /// `|V_k^+|`, mean `e_k`.
    E(u32),
    /// `Σ_{j=k}^{k+r} |V_j^+|` with `r` the edge span of the family.
    Band(u32),
    /// `|V_k^-|`.
    VMinus(u32),
    /// `|U_k^-|`, mean `a_k`.
    AMinus(u32),
    /// `|C(o) ∩ L_{-k}|`.
    WMinus(u32),
    /// Indicator of `U_k^- ≠ ∅`.
    Ascent(u32),
    /// Connection indicator to the given vertex.
    Tau(Vertex),
    /// Indicator that no ancestor up to height `t` has an isolated subtree.
    IsolatedTail(u32),
}

impl Statistic {
    /// Name used in reports: `e_k`, `band_k`, `v_minus_k`, `a_k`,
    /// `w_minus_k`, `A_k`, `tau`, `isolated_tail`.
    pub fn name(&self) -> &'static str {
        match self {
            Statistic::E(_) => "e_k",
            Statistic::Band(_) => "band_k",
            Statistic::VMinus(_) => "v_minus_k",
            Statistic::AMinus(_) => "a_k",
            Statistic::WMinus(_) => "w_minus_k",
            Statistic::Ascent(_) => "A_k",
            Statistic::Tau(_) => "tau",
            Statistic::IsolatedTail(_) => "isolated_tail",
        }
    }

    /// Level, height or (for `tau`) target level.
    pub fn k(&self) -> i64 {
        match self {
            Statistic::E(k)
            | Statistic::Band(k)
            | Statistic::VMinus(k)
            | Statistic::AMinus(k)
            | Statistic::WMinus(k)
            | Statistic::Ascent(k)
            | Statistic::IsolatedTail(k) => *k as i64,
            Statistic::Tau(v) => v.level(),
        }
    }

    /// Value at `p = 0`.
    pub fn trivial_value(&self, origin: &Vertex) -> u64 {
        match self {
            Statistic::E(0) | Statistic::VMinus(0) | Statistic::AMinus(0) | Statistic::WMinus(0) => 1,
            Statistic::Ascent(0) => 1,
            Statistic::Tau(y) => (y == origin) as u64,
            _ => 0,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Tau(v) => write!(f, "tau({v})"),
            Statistic::E(k) => write!(f, "e_{k}"),
            Statistic::Band(k) => write!(f, "band_{k}"),
            Statistic::VMinus(k) => write!(f, "v_minus_{k}"),
            Statistic::AMinus(k) => write!(f, "a_{k}"),
            Statistic::WMinus(k) => write!(f, "w_minus_{k}"),
            Statistic::Ascent(k) => write!(f, "A_{k}"),
            Statistic::IsolatedTail(t) => write!(f, "isolated_tail_{t}"),
        }
    }
}

/// Statistic name as written on the command line; `tau_d` still needs a
/// target (see [`distance_target`]).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StatisticSpec {
    Fixed(Statistic),
    TauAtDistance(u32),
}

impl StatisticSpec {
    pub fn resolve<L: Lattice + ?Sized>(&self, lattice: &L) -> Result<Statistic> {
        match self {
            StatisticSpec::Fixed(stat) => Ok(stat.clone()),
            StatisticSpec::TauAtDistance(d) => Ok(Statistic::Tau(distance_target(lattice, *d)?)),
        }
    }
}

impl FromStr for StatisticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let table: [(&str, fn(u32) -> Statistic); 7] = [
            ("e_", Statistic::E),
            ("band_", Statistic::Band),
            ("v_minus_", Statistic::VMinus),
            ("a_", Statistic::AMinus),
            ("w_minus_", Statistic::WMinus),
            ("A_", Statistic::Ascent),
            ("isolated_tail_", Statistic::IsolatedTail),
        ];
        let bad = || Error::InvalidArgument(format!("unknown statistic '{s}'"));
        if let Some(rest) = s.strip_prefix("tau_") {
            return rest.parse().map(StatisticSpec::TauAtDistance).map_err(|_| bad());
        }
        for (prefix, make) in table {
            if let Some(rest) = s.strip_prefix(prefix) {
                if let Ok(k) = rest.parse() {
                    return Ok(StatisticSpec::Fixed(make(k)));
                }
            }
        }
        Err(bad())
    }
}

/// Vertex at graph distance `d` from the origin used for connection decay.
///
/// Tree and triangle families descend along digit 0 (`2d` steps for the
/// grandparent graph, whose shortcuts halve the distance); DL graphs use
/// `d` down-moves with digit 0 and lamplighter graphs `d` plain steps.
pub fn distance_target<L: Lattice + ?Sized>(lattice: &L, d: u32) -> Result<Vertex> {
    let origin = lattice.origin();
    let v = match (lattice.kernel().family, &origin) {
        (Family::Grandparent { .. }, Vertex::Tree(t)) => Vertex::Tree(descend(t, 2 * d)),
        (_, Vertex::Tree(t)) => Vertex::Tree(descend(t, d)),
        (_, Vertex::Dl(v)) => Vertex::Dl((0..d).fold(v.clone(), |v, _| v.down(0))),
        (_, Vertex::Lamp(g)) => Vertex::Lamp(g.moved(d as i64)),
    };
    if !lattice.contains(&v) {
        return Err(Error::OutsideHalfGraph(v.to_string()));
    }
    Ok(v)
}

fn descend(t: &TreeAddress, depth: u32) -> TreeAddress {
    (0..depth).fold(t.clone(), |t, _| t.child(0))
}

/// Value of `stat` in one configuration; `None` when censored.
pub fn sample_statistic<L: Lattice + ?Sized>(
    lattice: &L,
    stat: &Statistic,
    states: &mut EdgeSampler,
    budget: u64,
) -> Result<Option<u64>> {
    let o = lattice.origin();
    Ok(match stat {
        Statistic::E(k) => forward_profile(lattice, states, &o, *k, budget)?.get(*k as usize),
        Statistic::Band(k) => band_occupancy(lattice, states, &o, *k, lattice.kernel().family.span(), budget)?,
        Statistic::VMinus(k) => upward_profile(lattice, states, &o, *k, false, budget)?.get(*k as usize),
        Statistic::AMinus(k) => upward_profile(lattice, states, &o, *k, true, budget)?.get(*k as usize),
        Statistic::WMinus(k) => full_profile(lattice, states, &o, *k, budget)?.get(*k as usize),
        Statistic::Ascent(k) => {
            let (h, censored) = ascent(lattice, states, &o, *k, budget)?;
            if h >= *k {
                Some(1)
            } else if censored {
                None
            } else {
                Some(0)
            }
        }
        Statistic::Tau(y) => connections(lattice, states, &o, std::slice::from_ref(y), budget)?[0].map(u64::from),
        Statistic::IsolatedTail(t) => Some(isolated_height(lattice, states, &o, *t)?.is_none() as u64),
    })
}

/// Mean of `stat` over `cfg.n` replicas at density `p`.
pub fn estimate_statistic<L: Lattice + ?Sized>(lattice: &L, stat: &Statistic, p: f64, cfg: &McConfig) -> Result<MCEstimate> {
    check_p(p)?;
    check_n(cfg.n)?;
    let accs = run_range(0..cfg.n, cfg.workers, 1, |i, accs| {
        let mut states = cfg.sampler(i, p);
        accs[0].push(sample_statistic(lattice, stat, &mut states, cfg.budget)?);
        Ok(())
    })?;
    accs[0].estimate()
}

/// Estimates of a level profile for `k = 0..=max_k` from one sweep per
/// replica.
pub fn estimate_profile<L: Lattice + ?Sized>(
    lattice: &L,
    mode: ProfileMode,
    max_k: u32,
    p: f64,
    cfg: &McConfig,
) -> Result<Vec<MCEstimate>> {
    check_p(p)?;
    check_n(cfg.n)?;
    let o = lattice.origin();
    let width = max_k as usize + 1;
    let accs = run_range(0..cfg.n, cfg.workers, width, |i, accs| {
        let mut states = cfg.sampler(i, p);
        let profile = match mode {
            ProfileMode::Forward => forward_profile(lattice, &mut states, &o, max_k, cfg.budget)?,
            ProfileMode::UpwardWindow => upward_profile(lattice, &mut states, &o, max_k, false, cfg.budget)?,
            ProfileMode::UpwardFree => upward_profile(lattice, &mut states, &o, max_k, true, cfg.budget)?,
            ProfileMode::FullCluster => full_profile(lattice, &mut states, &o, max_k, cfg.budget)?,
        };
        for (k, acc) in accs.iter_mut().enumerate() {
            acc.push(profile.get(k));
        }
        Ok(())
    })?;
    accs.iter().map(Accumulator::estimate).collect()
}

/// `P(A_k)` for `k = 0..=max_k` from one first-passage search per replica.
pub fn estimate_ascent<L: Lattice + ?Sized>(lattice: &L, max_k: u32, p: f64, cfg: &McConfig) -> Result<Vec<MCEstimate>> {
    check_p(p)?;
    check_n(cfg.n)?;
    let o = lattice.origin();
    let accs = run_range(0..cfg.n, cfg.workers, max_k as usize + 1, |i, accs| {
        let mut states = cfg.sampler(i, p);
        let (h, censored) = ascent(lattice, &mut states, &o, max_k, cfg.budget)?;
        for (k, acc) in accs.iter_mut().enumerate() {
            acc.push(if k as u32 <= h {
                Some(1)
            } else if censored {
                None
            } else {
                Some(0)
            });
        }
        Ok(())
    })?;
    accs.iter().map(Accumulator::estimate).collect()
}

/// Connection probabilities from the origin to each target, one
/// exploration per replica.
pub fn estimate_connections<L: Lattice + ?Sized>(
    lattice: &L,
    targets: &[Vertex],
    p: f64,
    cfg: &McConfig,
) -> Result<Vec<MCEstimate>> {
    check_p(p)?;
    check_n(cfg.n)?;
    let o = lattice.origin();
    let accs = run_range(0..cfg.n, cfg.workers, targets.len(), |i, accs| {
        let mut states = cfg.sampler(i, p);
        let hits = connections(lattice, &mut states, &o, targets, cfg.budget)?;
        for (acc, h) in accs.iter_mut().zip(hits) {
            acc.push(h.map(u64::from));
        }
        Ok(())
    })?;
    accs.iter().map(Accumulator::estimate).collect()
}

/// One line of the inequality report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InequalityRow {
    pub statistic: &'static str,
    pub k: u32,
    pub estimate: MCEstimate,
    pub bound: f64,
    /// `estimate.mean <= bound + 3 * estimate.stderr`.
    pub pass: bool,
}

/// Largest level checked by [`inequality_suite`] for `e_k`.
pub const SUITE_MAX_E: u32 = 8;
/// Largest level checked for `V_k^-`.
pub const SUITE_MAX_V: u32 = 6;
/// Band offsets checked on tree-based families.
pub const SUITE_BANDS: [u32; 3] = [2, 4, 6];

/// Checks the expectation bounds that hold at criticality:
///
/// * `e_k <= 1` for `k <= 8` on every family;
/// * `E|V_k^-| <= (β/α)^k` for `k <= 6` and `a_0 <= α/(α-β)` on `DL(α, β)`
///   with `α > β`;
/// * band occupancy `<= r + 1` at `k = 2, 4, 6` on tree-based families.
///
/// Failing rows are reported, not turned into errors.
pub fn inequality_suite<L: Lattice + ?Sized>(lattice: &L, p: f64, cfg: &McConfig) -> Result<Vec<InequalityRow>> {
    const Z: f64 = 3.0;
    let family = lattice.kernel().family;
    let mut rows = Vec::new();
    let row = |statistic, k, estimate: MCEstimate, bound: f64| InequalityRow {
        statistic,
        k,
        estimate,
        bound,
        pass: estimate.within_upper(bound, Z),
    };

    let span = family.span();
    let bands: &[u32] = if family.is_tree_based() { &SUITE_BANDS } else { &[] };
    let (forward, band) = forward_and_bands(lattice, SUITE_MAX_E, bands, span, p, cfg)?;
    for k in 0..=SUITE_MAX_E {
        rows.push(row("e_k", k, forward[k as usize], 1.0));
    }

    if let Family::Dl { alpha, beta } = family {
        if alpha > beta {
            let ratio = beta as f64 / alpha as f64;
            let up = estimate_profile(lattice, ProfileMode::UpwardWindow, SUITE_MAX_V, p, cfg)?;
            for k in 0..=SUITE_MAX_V {
                rows.push(row("v_minus_k", k, up[k as usize], ratio.powi(k as i32)));
            }
            let a0 = estimate_statistic(lattice, &Statistic::AMinus(0), p, cfg)?;
            rows.push(row("a_k", 0, a0, alpha as f64 / (alpha - beta) as f64));
        }
    }

    for (&k, est) in bands.iter().zip(band) {
        rows.push(row("band_k", k, est, (span + 1) as f64));
    }
    Ok(rows)
}

/// Forward profile up to `max_k` and band sums `Σ_{j=k}^{k+r}` for each
/// `k` in `bands`, all from one sweep per replica.
fn forward_and_bands<L: Lattice + ?Sized>(
    lattice: &L,
    max_k: u32,
    bands: &[u32],
    r: u32,
    p: f64,
    cfg: &McConfig,
) -> Result<(Vec<MCEstimate>, Vec<MCEstimate>)> {
    check_p(p)?;
    check_n(cfg.n)?;
    let o = lattice.origin();
    let depth = bands.iter().map(|k| k + r).chain([max_k]).max().unwrap_or(max_k);
    let width = max_k as usize + 1;
    let accs = run_range(0..cfg.n, cfg.workers, width + bands.len(), |i, accs| {
        let mut states = cfg.sampler(i, p);
        let profile = forward_profile(lattice, &mut states, &o, depth, cfg.budget)?;
        let (levels, sums) = accs.split_at_mut(width);
        for (k, acc) in levels.iter_mut().enumerate() {
            acc.push(profile.get(k));
        }
        for (&k, acc) in bands.iter().zip(sums) {
            acc.push((k..=k + r).map(|j| profile.get(j as usize)).sum());
        }
        Ok(())
    })?;
    let est: Vec<MCEstimate> = accs.iter().map(Accumulator::estimate).collect::<Result<_>>()?;
    let (levels, sums) = est.split_at(width);
    Ok((levels.to_vec(), sums.to_vec()))
}

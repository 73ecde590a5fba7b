//! Level profiles and the derived observables.

use serde::Serialize;

use super::sweep::{with_sweep, Event, Flow, Growth, Outcome, Plan};
use super::{check_budget, check_start, Constraint, EdgeStates};
use crate::error::{Error, Result};
use crate::graphs::{Family, HalfMode, Kernel, Lattice, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    Forward,
    UpwardWindow,
    UpwardFree,
    FullCluster,
}

/// Per-level counts `k = 0, 1, ...` of one exploration.
///
/// When the budget runs out, only the counts completed before that point
/// are kept and `censored` is set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Profile {
    pub mode: ProfileMode,
    pub counts: Vec<u64>,
    pub censored: bool,
}

impl Profile {
    /// Count at offset `k`, or `None` if it was censored.
    pub fn get(&self, k: usize) -> Option<u64> {
        self.counts.get(k).copied()
    }
}

/// Outcome of a first-passage search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reach {
    Reached,
    NotReached,
    Censored,
}

/// Constraint defining the forward cluster of `o` with levels in `[0, k]`.
///
/// Tree-based families stay inside the downwards subtree of `o`. On the
/// nonnegative half of `lamp_walk` the lamp at the rightmost lit position of
/// `o` is frozen (no constraint when nothing is lit).
pub fn forward_constraint(kernel: &Kernel, o: &Vertex, k: Option<i64>) -> Constraint {
    let mut c = Constraint::window(Some(0), k);
    if kernel.family.is_tree_based() {
        if let Some(t) = o.as_tree() {
            c = c.with_subtree(t.clone());
        }
    }
    if lamp_half(kernel) {
        c = c.with_frozen_lamp(o.as_lamp().and_then(|g| g.right_flag()));
    }
    c
}

fn lamp_half(kernel: &Kernel) -> bool {
    kernel.family == Family::LampWalk && kernel.half != HalfMode::None
}

/// Whether `v` may be counted as a forward endpoint: on the nonnegative
/// half of `lamp_walk` only vertices of the Fibonacci tree count.
#[inline]
pub fn forward_endpoint(kernel: &Kernel, v: &Vertex) -> bool {
    if kernel.family == Family::LampWalk && kernel.half == HalfMode::NonnegStreet {
        match v {
            Vertex::Lamp(g) => g.right_flag().is_none_or(|r| r <= g.pos),
            _ => false,
        }
    } else {
        true
    }
}

fn level_sweep<L, S>(
    lattice: &L,
    states: &mut S,
    o: &Vertex,
    constraint: &Constraint,
    growth: Growth,
    max_k: u32,
    sign: i64,
    filter: bool,
    budget: u64,
) -> (Vec<u64>, Vec<u64>, bool)
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    let base = o.level();
    let kernel = *lattice.kernel();
    let plan = Plan { base, constraint, growth, max_phase: max_k };
    let mut by_level = vec![0u64; max_k as usize + 1];
    let mut counts = Vec::with_capacity(max_k as usize + 1);
    let outcome = with_sweep(|sweep| {
        sweep.run(
            lattice,
            states,
            o,
            &plan,
            budget,
            |event| {
                match event {
                    Event::Visit(v) => {
                        let k = sign * (v.level() - base);
                        if (0..=max_k as i64).contains(&k) && (!filter || forward_endpoint(&kernel, v)) {
                            by_level[k as usize] += 1;
                        }
                    }
                    Event::PhaseEnd(t) => counts.push(by_level[t as usize]),
                }
                Flow::Continue
            },
        )
    });
    (counts, by_level, matches!(outcome, Outcome::Censored(_)))
}

/// `|V_k^+(o)|` for `k = 0..=max_k` from one incremental sweep.
pub fn forward_profile<L, S>(lattice: &L, states: &mut S, o: &Vertex, max_k: u32, budget: u64) -> Result<Profile>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    let constraint = forward_constraint(lattice.kernel(), o, Some(max_k as i64));
    check_start(lattice, o, &constraint)?;
    check_budget(budget)?;
    let (counts, _, censored) = level_sweep(lattice, states, o, &constraint, Growth::Down, max_k, 1, true, budget);
    Ok(Profile { mode: ProfileMode::Forward, counts, censored })
}

fn upward_plan(kernel: &Kernel, o: &Vertex, max_k: u32, free: bool) -> Result<(Constraint, Growth)> {
    if lamp_half(kernel) {
        return Err(Error::InvalidArgument("upward counts are only defined on the full lamp_walk graph".into()));
    }
    let hi = if free { None } else { Some(0) };
    let constraint = Constraint::window(Some(-(max_k as i64)), hi);
    let subtree = (!free && kernel.family.is_tree_based()).then(|| o.as_tree().cloned()).flatten();
    Ok((constraint, Growth::Up(subtree)))
}

/// Counts at `k` levels above `o` for `k = 0..=max_k`, by path reversal.
///
/// With `free = false` this is `|V_k^-(o)|` (levels in `[-k, 0]`, and for
/// tree-based families inside the subtree of the `k`-th ancestor); with
/// `free = true` it is `|U_k^-(o)|` (levels `>= -k`).
pub fn upward_profile<L, S>(lattice: &L, states: &mut S, o: &Vertex, max_k: u32, free: bool, budget: u64) -> Result<Profile>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    let (constraint, growth) = upward_plan(lattice.kernel(), o, max_k, free)?;
    check_start(lattice, o, &constraint)?;
    check_budget(budget)?;
    let (counts, _, censored) = level_sweep(lattice, states, o, &constraint, growth, max_k, -1, false, budget);
    let mode = if free { ProfileMode::UpwardFree } else { ProfileMode::UpwardWindow };
    Ok(Profile { mode, counts, censored })
}

/// Vertices `k` levels above `o` counted by [`upward_profile`], sorted.
pub fn upward_set<L, S>(lattice: &L, states: &mut S, o: &Vertex, k: u32, free: bool, budget: u64) -> Result<Option<Vec<Vertex>>>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    let (constraint, growth) = upward_plan(lattice.kernel(), o, k, free)?;
    check_start(lattice, o, &constraint)?;
    check_budget(budget)?;
    let target = o.level() - k as i64;
    let plan = Plan { base: o.level(), constraint: &constraint, growth, max_phase: k };
    let mut found = Vec::new();
    let outcome = with_sweep(|sweep| {
        sweep.run(
            lattice,
            states,
            o,
            &plan,
            budget,
            |event| {
                if let Event::Visit(v) = event {
                    if v.level() == target {
                        found.push(v.clone());
                    }
                }
                Flow::Continue
            },
        )
    });
    if matches!(outcome, Outcome::Censored(_)) {
        return Ok(None);
    }
    found.sort_unstable();
    Ok(Some(found))
}

/// `|W_k^-(o)| = |C(o) ∩ L_{-k}|` for `k = 0..=max_k`; all counts are
/// censored when the whole cluster cannot be explored within budget.
pub fn full_profile<L, S>(lattice: &L, states: &mut S, o: &Vertex, max_k: u32, budget: u64) -> Result<Profile>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    let constraint = Constraint::free();
    check_start(lattice, o, &constraint)?;
    check_budget(budget)?;
    let (_, by_level, censored) =
        level_sweep(lattice, states, o, &constraint, Growth::Fixed, max_k, -1, false, budget);
    let counts = if censored { Vec::new() } else { by_level };
    Ok(Profile { mode: ProfileMode::FullCluster, counts, censored })
}

/// First-passage search for a vertex at relative level `target` under
/// `constraint`, expanding vertices nearest to that level first.
pub fn reaches_level<L, S>(lattice: &L, states: &mut S, o: &Vertex, target: i64, constraint: &Constraint, budget: u64) -> Result<Reach>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    reach_with(lattice, states, o, target, constraint, false, budget)
}

fn reach_with<L, S>(
    lattice: &L,
    states: &mut S,
    o: &Vertex,
    target: i64,
    constraint: &Constraint,
    filter: bool,
    budget: u64,
) -> Result<Reach>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    check_start(lattice, o, constraint)?;
    check_budget(budget)?;
    let kernel = *lattice.kernel();
    let level = o.level() + target;
    let plan = Plan { base: o.level(), constraint, growth: Growth::Fixed, max_phase: 0 };
    let outcome = with_sweep(|sweep| {
        sweep.run_toward(lattice, states, o, &plan, level, budget, |v| {
            if v.level() == level && (!filter || forward_endpoint(&kernel, v)) {
                Flow::Stop
            } else {
                Flow::Continue
            }
        })
    });
    Ok(match outcome {
        Outcome::Stopped => Reach::Reached,
        Outcome::Completed => Reach::NotReached,
        Outcome::Censored(_) => Reach::Censored,
    })
}

/// Whether the forward cluster of `o` reaches depth `k`, i.e. `V_k^+ ≠ ∅`.
pub fn survives<L, S>(lattice: &L, states: &mut S, o: &Vertex, k: u32, budget: u64) -> Result<Reach>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    let constraint = forward_constraint(lattice.kernel(), o, Some(k as i64));
    reach_with(lattice, states, o, k as i64, &constraint, true, budget)
}

/// Connection indicators from `x` to each target: `Some(true)` when an
/// open path was found, `Some(false)` when the cluster was exhausted without
/// one, `None` when censored.
pub fn connections<L, S>(lattice: &L, states: &mut S, x: &Vertex, targets: &[Vertex], budget: u64) -> Result<Vec<Option<bool>>>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    let constraint = Constraint::free();
    check_start(lattice, x, &constraint)?;
    check_budget(budget)?;
    let mut hit = vec![false; targets.len()];
    let mut left = targets.len();
    let plan = Plan { base: x.level(), constraint: &constraint, growth: Growth::Fixed, max_phase: 0 };
    let outcome = with_sweep(|sweep| {
        sweep.run(
            lattice,
            states,
            x,
            &plan,
            budget,
            |event| {
                if let Event::Visit(v) = event {
                    for (i, y) in targets.iter().enumerate() {
                        if !hit[i] && v == y {
                            hit[i] = true;
                            left -= 1;
                        }
                    }
                }
                if left == 0 {
                    Flow::Stop
                } else {
                    Flow::Continue
                }
            },
        )
    });
    let censored = matches!(outcome, Outcome::Censored(_));
    Ok(hit.into_iter().map(|h| if h { Some(true) } else if censored { None } else { Some(false) }).collect())
}

/// `Σ_{j=k}^{k+r} |V_j^+(o)|`, or `None` if censored.
pub fn band_occupancy<L, S>(lattice: &L, states: &mut S, o: &Vertex, k: u32, r: u32, budget: u64) -> Result<Option<u64>>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    let profile = forward_profile(lattice, states, o, k + r, budget)?;
    Ok((k..=k + r).map(|j| profile.get(j as usize)).sum())
}

/// One offspring count `|V_{k0}^+(o)|` of the embedded branching process.
pub fn gw_offspring<L, S>(lattice: &L, states: &mut S, o: &Vertex, k0: u32, budget: u64) -> Result<Option<u64>>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    if k0 == 0 {
        return Err(Error::InvalidArgument("offspring depth must be at least 1".into()));
    }
    Ok(forward_profile(lattice, states, o, k0, budget)?.get(k0 as usize))
}

/// Smallest `t <= cap` such that the subtree of the `t`-th ancestor of `o`
/// has no open edge leaving it; `None` if there is none.
pub fn isolated_height<L, S>(lattice: &L, states: &mut S, o: &Vertex, cap: u32) -> Result<Option<u32>>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    let kernel = *lattice.kernel();
    let Some(t0) = o.as_tree().filter(|_| kernel.family.is_tree_based()) else {
        return Err(Error::WrongFamily { expected: "a tree-based family", got: kernel.to_string() });
    };
    kernel.validate(o)?;
    let span = kernel.family.span();
    let mut buf = Vec::new();
    'height: for t in 0..=cap {
        let v = t0.ancestor(t as u64);
        for u in kernel.subtree_layers(&v, span - 1) {
            let u = Vertex::Tree(u);
            if !lattice.contains(&u) {
                continue;
            }
            buf.clear();
            lattice.push_neighbors(&u, &mut buf);
            for w in &buf {
                let inside = w.as_tree().is_some_and(|w| w.is_descendant_of(&v));
                if !inside && states.is_open(&u, w) {
                    continue 'height;
                }
            }
        }
        return Ok(Some(t));
    }
    Ok(None)
}

/// Highest level reached above `o` by an open path staying at levels
/// `>= -max_k`, capped at `max_k`.
///
/// The second value is `true` when the budget ran out before either level
/// `-max_k` was hit or the search was exhausted; the height is then only a
/// lower bound. Height `h` means the first-passage event `A_k` holds for
/// every `k <= h`.
pub fn ascent<L, S>(lattice: &L, states: &mut S, o: &Vertex, max_k: u32, budget: u64) -> Result<(u32, bool)>
where
    L: Lattice + ?Sized,
    S: EdgeStates + ?Sized,
{
    let constraint = Constraint::window(Some(-(max_k as i64)), None);
    check_start(lattice, o, &constraint)?;
    check_budget(budget)?;
    let base = o.level();
    let plan = Plan { base, constraint: &constraint, growth: Growth::Fixed, max_phase: 0 };
    let mut best = 0u32;
    let outcome = with_sweep(|sweep| {
        sweep.run_toward(lattice, states, o, &plan, base - max_k as i64, budget, |v| {
            best = best.max((base - v.level()).max(0) as u32);
            if best >= max_k {
                Flow::Stop
            } else {
                Flow::Continue
            }
        })
    });
    Ok((best, matches!(outcome, Outcome::Censored(_))))
}

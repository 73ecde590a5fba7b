//! Breadth-first sweep over a nested family of regions `R_0 ⊆ R_1 ⊆ ...`.
//!
//! Each vertex has a first phase at which it becomes admissible. While phase
//! `t` runs, an open edge into a vertex of a later phase is parked in a
//! pending list and released when that phase starts, so a single pass
//! visits exactly the reachable part of every `R_t` in turn.

use std::cell::RefCell;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use rustc_hash::FxHashSet;

use super::{Constraint, EdgeStates};
use crate::graphs::{Lattice, TreeAddress, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Flow {
    Continue,
    Stop,
}

/// Progress report passed to the sweep callback.
pub(crate) enum Event<'v> {
    /// A vertex was visited.
    Visit(&'v Vertex),
    /// The given phase is exhausted.
    PhaseEnd(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    /// Every phase ran to exhaustion.
    Completed,
    /// A callback asked to stop.
    Stopped,
    /// The budget ran out during the given phase.
    Censored(u32),
}

/// How the admissible region grows with the phase.
#[derive(Clone, Debug)]
pub(crate) enum Growth {
    /// Single region.
    Fixed,
    /// Phase is the level offset below the base.
    Down,
    /// Phase is the level offset above the base; with a tree address the
    /// region is also confined to the subtree of the ancestor at that offset.
    Up(Option<TreeAddress>),
}

pub(crate) struct Plan<'a> {
    pub base: i64,
    pub constraint: &'a Constraint,
    pub growth: Growth,
    pub max_phase: u32,
}

impl Plan<'_> {
    #[inline]
    fn phase(&self, v: &Vertex) -> Option<u32> {
        if !self.constraint.admits(self.base, v) {
            return None;
        }
        let rel = v.level() - self.base;
        let phase = match &self.growth {
            Growth::Fixed => 0,
            Growth::Down => rel,
            Growth::Up(None) => (-rel).max(0),
            Growth::Up(Some(o)) => {
                let t = v.as_tree()?;
                (-rel).max(o.level - o.meet_level(t))
            }
        };
        u32::try_from(phase).ok().filter(|&t| t <= self.max_phase)
    }
}

#[derive(Default)]
pub(crate) struct Sweep {
    visited: FxHashSet<Vertex>,
    queue: VecDeque<Vertex>,
    pending: Vec<Vec<Vertex>>,
    buf: Vec<Vertex>,
    heap: BinaryHeap<(Reverse<u64>, Reverse<u64>, Vertex)>,
    pub expansions: u64,
    pub edges_examined: u64,
}

thread_local! {
    static WORKSPACE: RefCell<Sweep> = RefCell::new(Sweep::default());
}

/// Runs `f` with this thread's reusable sweep.
pub(crate) fn with_sweep<R>(f: impl FnOnce(&mut Sweep) -> R) -> R {
    let mut sweep = WORKSPACE.with(|w| std::mem::take(&mut *w.borrow_mut()));
    let out = f(&mut sweep);
    WORKSPACE.with(|w| *w.borrow_mut() = sweep);
    out
}

impl Sweep {
    fn reset(&mut self, phases: usize) {
        self.visited.clear();
        self.queue.clear();
        for p in &mut self.pending {
            p.clear();
        }
        if self.pending.len() < phases {
            self.pending.resize_with(phases, Vec::new);
        }
        self.heap.clear();
        self.expansions = 0;
        self.edges_examined = 0;
    }

    /// Searches the region of a fixed plan, always expanding a visited vertex
    /// closest in level to `target` (ties in visiting order).
    ///
    /// Visits the same cluster as [`Sweep::run`] when run to exhaustion, but
    /// reaches far levels quickly when the cluster is large.
    pub fn run_toward<L, S>(
        &mut self,
        lattice: &L,
        states: &mut S,
        o: &Vertex,
        plan: &Plan<'_>,
        target: i64,
        budget: u64,
        mut on_visit: impl FnMut(&Vertex) -> Flow,
    ) -> Outcome
    where
        L: Lattice + ?Sized,
        S: EdgeStates + ?Sized,
    {
        self.reset(1);
        let mut buf = std::mem::take(&mut self.buf);
        let mut order = 0u64;
        let key = |v: &Vertex| Reverse(v.level().abs_diff(target));
        let outcome = 'sweep: {
            self.visited.insert(o.clone());
            if on_visit(o) == Flow::Stop {
                break 'sweep Outcome::Stopped;
            }
            self.heap.push((key(o), Reverse(order), o.clone()));
            while let Some((_, _, v)) = self.heap.pop() {
                if self.expansions >= budget {
                    break 'sweep Outcome::Censored(0);
                }
                self.expansions += 1;
                buf.clear();
                lattice.push_neighbors(&v, &mut buf);
                for w in buf.drain(..) {
                    if self.visited.contains(&w) || plan.phase(&w).is_none() || !plan.constraint.edge_allowed(&v, &w) {
                        continue;
                    }
                    self.edges_examined += 1;
                    if !states.is_open(&v, &w) {
                        continue;
                    }
                    self.visited.insert(w.clone());
                    if on_visit(&w) == Flow::Stop {
                        break 'sweep Outcome::Stopped;
                    }
                    order += 1;
                    self.heap.push((key(&w), Reverse(order), w));
                }
            }
            Outcome::Completed
        };
        buf.clear();
        self.buf = buf;
        outcome
    }

    /// Sweeps from `o`, which must be admissible at phase 0.
    ///
    /// The callback sees every newly visited vertex and the end of every
    /// phase, and may stop the sweep early.
    pub fn run<L, S>(
        &mut self,
        lattice: &L,
        states: &mut S,
        o: &Vertex,
        plan: &Plan<'_>,
        budget: u64,
        mut on_event: impl FnMut(Event<'_>) -> Flow,
    ) -> Outcome
    where
        L: Lattice + ?Sized,
        S: EdgeStates + ?Sized,
    {
        self.reset(plan.max_phase as usize + 1);
        let mut buf = std::mem::take(&mut self.buf);
        let outcome = 'sweep: {
            self.visited.insert(o.clone());
            if on_event(Event::Visit(o)) == Flow::Stop {
                break 'sweep Outcome::Stopped;
            }
            self.queue.push_back(o.clone());
            for t in 0..=plan.max_phase {
                if t > 0 {
                    let released = std::mem::take(&mut self.pending[t as usize]);
                    for w in &released {
                        if self.visited.insert(w.clone()) {
                            if on_event(Event::Visit(w)) == Flow::Stop {
                                self.pending[t as usize] = released;
                                break 'sweep Outcome::Stopped;
                            }
                            self.queue.push_back(w.clone());
                        }
                    }
                    self.pending[t as usize] = released;
                }
                while let Some(v) = self.queue.pop_front() {
                    if self.expansions >= budget {
                        self.queue.push_front(v);
                        break 'sweep Outcome::Censored(t);
                    }
                    self.expansions += 1;
                    buf.clear();
                    lattice.push_neighbors(&v, &mut buf);
                    for w in buf.drain(..) {
                        if self.visited.contains(&w) {
                            continue;
                        }
                        let Some(phase) = plan.phase(&w) else { continue };
                        if !plan.constraint.edge_allowed(&v, &w) {
                            continue;
                        }
                        self.edges_examined += 1;
                        if !states.is_open(&v, &w) {
                            continue;
                        }
                        if phase <= t {
                            self.visited.insert(w.clone());
                            if on_event(Event::Visit(&w)) == Flow::Stop {
                                break 'sweep Outcome::Stopped;
                            }
                            self.queue.push_back(w);
                        } else {
                            self.pending[phase as usize].push(w);
                        }
                    }
                }
                if on_event(Event::PhaseEnd(t)) == Flow::Stop {
                    break 'sweep Outcome::Stopped;
                }
            }
            Outcome::Completed
        };
        buf.clear();
        self.buf = buf;
        outcome
    }
}

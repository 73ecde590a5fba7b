//! Critical-point estimation by bisection with coupled seeds.
//!
//! Every probe reuses replica seeds `0..n`, so per-replica values are
//! monotone in `p` and the probe decisions are consistent with a single
//! empirical curve. Probes stop early once the decision is settled.

use serde::Serialize;

use super::{check_n, estimate_profile, run_range, Accumulator, McConfig};
use crate::error::{Error, Result};
use crate::graphs::Lattice;
use crate::perc::{forward_profile, survives, ProfileMode, Reach};

/// Blocks per probe between early-decision checks.
const BLOCKS: u64 = 64;
/// Smallest block, per worker.
const MIN_BLOCK: u64 = 256;
/// Replicas used for the slope and spread behind the reported standard error.
const SE_REPLICAS: u64 = 1 << 16;
/// Half-width of the finite difference for the slope.
const SE_STEP: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PcMethod {
    /// Root of `e_{k0}(p) = 1`.
    Crossing { k0: u32 },
    /// Root of a survival condition at depth `K`.
    Survival { depth: u32, target: SurvivalTarget },
}

/// Condition on the probability `s_K(p)` that the forward cluster reaches
/// depth `K`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum SurvivalTarget {
    /// `s_K(p) = threshold`.
    Level(f64),
    /// `s_{2K}(p) = s_K(p) / 2`, the depth scaling of a critical branching
    /// process.
    Halving,
}

/// One bisection probe: whether the statistic was at or above its target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub p: f64,
    pub above: bool,
    /// Replicas evaluated before the decision was settled.
    pub replicas: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PcEstimate {
    pub p_hat: f64,
    pub bracket: (f64, f64),
    pub method: PcMethod,
    /// Replicas per probe.
    pub replicas: u64,
    /// Delta-method standard error of `p_hat`.
    pub stderr: f64,
    pub probes: Vec<Probe>,
    pub label: &'static str,
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    Ok(())
}

/// Bisects `[0, 1]` until the width is at most `tol / 2`.
fn bisect(tol: f64, mut above: impl FnMut(f64) -> Result<(bool, u64)>) -> Result<(f64, f64, Vec<Probe>)> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut probes = Vec::new();
    while hi - lo > tol / 2.0 {
        let p = 0.5 * (lo + hi);
        let (up, replicas) = above(p)?;
        probes.push(Probe { p, above: up, replicas });
        if up {
            hi = p;
        } else {
            lo = p;
        }
    }
    Ok((lo, hi, probes))
}

/// Estimates `p_c` as the root of `ê_{k0}(p) = 1`.
///
/// The root for a fixed `k0` is an upper-bound-type estimate of `p_c` and
/// the report says so. Censored replicas are dropped from each probe mean.
pub fn pc_crossing<L: Lattice + ?Sized>(lattice: &L, k0: u32, tol: f64, cfg: &McConfig) -> Result<PcEstimate> {
    if k0 == 0 {
        return Err(Error::InvalidArgument("k0 must be at least 1".into()));
    }
    check_tol(tol)?;
    check_n(cfg.n)?;
    let o = lattice.origin();
    let full = forward_profile(lattice, &mut cfg.sampler(0, 1.0), &o, k0, cfg.budget)?;
    if full.get(k0 as usize).is_some_and(|c| c < 1) {
        return Err(Error::Bracket(format!("e_{k0}(1) < 1, the crossing cannot be bracketed")));
    }

    let (lo, hi, probes) = bisect(tol, |p| {
        let mut total = Accumulator::default();
        let mut start = 0;
        while start < cfg.n {
            let end = (start + block(cfg)).min(cfg.n);
            let accs = run_range(start..end, cfg.workers, 1, |i, accs| {
                let profile = forward_profile(lattice, &mut cfg.sampler(i, p), &o, k0, cfg.budget)?;
                accs[0].push(profile.get(k0 as usize));
                Ok(())
            })?;
            total.merge(&accs[0]);
            start = end;
            // The final threshold n - censored is at most n.
            if total.sum >= cfg.n as u128 {
                return Ok((true, end));
            }
        }
        Ok((total.sum >= total.used() as u128, cfg.n))
    })?;
    let p_hat = 0.5 * (lo + hi);

    let se_cfg = cfg.with_n(cfg.n.min(SE_REPLICAS));
    let at = |p: f64| -> Result<(f64, f64)> {
        let est = estimate_profile(lattice, ProfileMode::Forward, k0, p.clamp(0.0, 1.0), &se_cfg)?[k0 as usize];
        Ok((est.mean, est.stderr * (est.n_used() as f64).sqrt()))
    };
    let (_, sd) = at(p_hat)?;
    let (p_minus, p_plus) = ((p_hat - SE_STEP).max(0.0), (p_hat + SE_STEP).min(1.0));
    let slope = (at(p_plus)?.0 - at(p_minus)?.0) / (p_plus - p_minus);
    let stderr = delta_stderr(sd, cfg.n, slope);

    Ok(PcEstimate {
        p_hat,
        bracket: (lo, hi),
        method: PcMethod::Crossing { k0 },
        replicas: cfg.n,
        stderr,
        probes,
        label: "crossing estimate, upper-bound flavoured",
    })
}

/// Estimates `p_c` from the survival probabilities `s_K(p)`, the chance
/// that the forward cluster reaches depth `K`.
///
/// Censored replicas count as reaching the depth.
pub fn pc_survival<L: Lattice + ?Sized>(
    lattice: &L,
    depth: u32,
    target: SurvivalTarget,
    tol: f64,
    cfg: &McConfig,
) -> Result<PcEstimate> {
    if depth < 4 {
        return Err(Error::InvalidArgument(format!("survival depth must be at least 4, got {depth}")));
    }
    if let SurvivalTarget::Level(t) = target {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1), got {t}")));
        }
    }
    check_tol(tol)?;
    check_n(cfg.n)?;
    let o = lattice.origin();
    if survives(lattice, &mut cfg.sampler(0, 1.0), &o, depth, cfg.budget)? == Reach::NotReached {
        return Err(Error::Bracket(format!("depth {depth} is not reached even at p = 1")));
    }

    // accs[0] counts survival to depth K, accs[1] to depth 2K.
    let replica = |i: u64, p: f64, accs: &mut [Accumulator]| -> Result<()> {
        let mut states = cfg.sampler(i, p);
        let first = survives(lattice, &mut states, &o, depth, cfg.budget)? != Reach::NotReached;
        accs[0].push(Some(first as u64));
        if target == SurvivalTarget::Halving {
            let second = first && survives(lattice, &mut states, &o, 2 * depth, cfg.budget)? != Reach::NotReached;
            accs[1].push(Some(second as u64));
        }
        Ok(())
    };
    let run = |range: std::ops::Range<u64>, p: f64| -> Result<(u64, u64)> {
        let accs = run_range(range, cfg.workers, 2, |i, accs| replica(i, p, accs))?;
        Ok((accs[0].sum as u64, accs[1].sum as u64))
    };

    let (lo, hi, probes) = match target {
        SurvivalTarget::Level(threshold) => {
            let need = (threshold * cfg.n as f64).ceil() as u64;
            bisect(tol, |p| {
                let mut hits = 0u64;
                let mut start = 0;
                while start < cfg.n {
                    let end = (start + block(cfg)).min(cfg.n);
                    hits += run(start..end, p)?.0;
                    start = end;
                    if hits >= need {
                        return Ok((true, end));
                    }
                    if hits + (cfg.n - end) < need {
                        return Ok((false, end));
                    }
                }
                Ok((hits >= need, cfg.n))
            })?
        }
        SurvivalTarget::Halving => bisect(tol, |p| {
            let (k, k2) = run(0..cfg.n, p)?;
            Ok((2 * k2 >= k && k > 0, cfg.n))
        })?,
    };
    let p_hat = 0.5 * (lo + hi);

    // Delta method on the decision statistic, g = s_K - threshold or
    // g = 2 s_{2K} - s_K, with the spread of the per-replica contribution.
    let m = cfg.n.min(SE_REPLICAS);
    let g = |p: f64| -> Result<(f64, f64)> {
        let (k, k2) = run(0..m, p)?;
        let (a, b) = (k as f64 / m as f64, k2 as f64 / m as f64);
        Ok(match target {
            SurvivalTarget::Level(t) => (a - t, a * (1.0 - a)),
            // Per replica 2·[2K] - [K] takes values 1 (both), -1 (K only), 0.
            SurvivalTarget::Halving => (2.0 * b - a, a - (2.0 * b - a).powi(2)),
        })
    };
    let (_, var) = g(p_hat)?;
    let (p_minus, p_plus) = ((p_hat - SE_STEP).max(0.0), (p_hat + SE_STEP).min(1.0));
    let slope = (g(p_plus)?.0 - g(p_minus)?.0) / (p_plus - p_minus);
    let stderr = delta_stderr(var.max(0.0).sqrt(), cfg.n, slope);

    Ok(PcEstimate {
        p_hat,
        bracket: (lo, hi),
        method: PcMethod::Survival { depth, target },
        replicas: cfg.n,
        stderr,
        probes,
        label: "finite-depth survival estimate",
    })
}

fn block(cfg: &McConfig) -> u64 {
    (cfg.n / BLOCKS).max(MIN_BLOCK * cfg.workers as u64)
}

fn delta_stderr(sd: f64, n: u64, slope: f64) -> f64 {
    if slope > 0.0 {
        sd / (n as f64).sqrt() / slope
    } else {
        f64::INFINITY
    }
}

//! Partition counts, loop-growth bounds and the threshold ledger for
//! Diestel-Leader graphs.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// Number of partitions of `n` into distinct parts, `q(0) = 1`.
pub fn q_distinct(n: usize) -> BigUint {
    q_distinct_table(n).pop().unwrap()
}

/// `q(m)` for every `m <= n`.
///
/// Uses the recurrence for partitions into exactly `k` distinct parts,
/// `Q(m, k) = Q(m - k, k) + Q(m - k, k - 1)`: removing one from every part
/// either keeps `k` parts or drops a part equal to one.
pub fn q_distinct_table(n: usize) -> Vec<BigUint> {
    let mut total = vec![BigUint::zero(); n + 1];
    total[0] = BigUint::one();
    // prev[m] = Q(m, k - 1), starting with Q(m, 0) = [m == 0].
    let mut prev = vec![BigUint::zero(); n + 1];
    prev[0] = BigUint::one();
    let mut k = 1;
    while k * (k + 1) / 2 <= n {
        let mut cur = vec![BigUint::zero(); n + 1];
        for m in k * (k + 1) / 2..=n {
            let mut v = cur[m - k].clone();
            v += &prev[m - k];
            cur[m] = v;
        }
        for (t, c) in total.iter_mut().zip(&cur) {
            if !c.is_zero() {
                *t += c;
            }
        }
        prev = cur;
        k += 1;
    }
    total
}

/// Number of partitions of `n` into odd parts.
pub fn q_odd(n: usize) -> BigUint {
    q_odd_table(n).pop().unwrap()
}

/// Partitions into odd parts for every `m <= n`, by the coin-change
/// recurrence over the parts `1, 3, 5, ...`.
pub fn q_odd_table(n: usize) -> Vec<BigUint> {
    let mut dp = vec![BigUint::zero(); n + 1];
    dp[0] = BigUint::one();
    for part in (1..=n).step_by(2) {
        for m in part..=n {
            let (lo, hi) = dp.split_at_mut(m);
            hi[0] += &lo[m - part];
        }
    }
    dp
}

/// Natural log of `e^{π√(n/3)} / (4 · 3^{1/4} · n^{3/4})`.
pub fn q_asym_log(n: u64) -> f64 {
    let n = n as f64;
    std::f64::consts::PI * (n / 3.0).sqrt() - 4f64.ln() - 0.25 * 3f64.ln() - 0.75 * n.ln()
}

/// Natural logarithm of a big integer (negative infinity for zero).
pub fn ln_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `Σ_{k=1}^{⌈√(2n)⌉} C(n, k)`, an upper bound for `q(n)` when `n >= 1`.
pub fn binomial_sum_bound(n: u64) -> BigUint {
    let top = ((2 * n) as f64).sqrt().ceil() as u64;
    let mut sum = BigUint::zero();
    let mut term = BigUint::one();
    for k in 1..=top.min(n) {
        term *= n - k + 1;
        term /= k;
        sum += &term;
    }
    sum
}

/// Smallest power of two `C` with `ln q(n) <= ln Σ C(n,k) <= C √n ln n` for
/// all `2 <= n <= max_n`.
pub fn growth_constant(max_n: u64) -> u32 {
    let logs: Vec<(f64, f64)> = (2..=max_n)
        .map(|n| (ln_big(&binomial_sum_bound(n)), (n as f64).sqrt() * (n as f64).ln()))
        .collect();
    let mut c = 1u32;
    while !logs.iter().all(|&(lhs, scale)| lhs <= c as f64 * scale) {
        c *= 2;
    }
    c
}

/// `√(αβ) + √((α-1)(β-1))`.
pub fn gamma_bound(alpha: u32, beta: u32) -> f64 {
    let (a, b) = (alpha as f64, beta as f64);
    (a * b).sqrt() + ((a - 1.0) * (b - 1.0)).sqrt()
}

/// `Σ_{k=0}^{n} C(2n, 2k) (αβ)^{n-k} ((α-1)(β-1))^k`.
pub fn loop_sum_bound(n: u32, alpha: u32, beta: u32) -> BigUint {
    let ab = BigUint::from(alpha as u64 * beta as u64);
    let cd = BigUint::from((alpha as u64 - 1) * (beta as u64 - 1));
    (0..=n)
        .map(|k| binomial(2 * n as u64, 2 * k as u64) * ab.pow(n - k) * cd.pow(k))
        .sum()
}

/// Checks `loop_sum_bound(n) <= (αβ)^n (1 + x)^{2n} = γ^{2n}` with the
/// integer rounded up and the real side rounded down.
pub fn loop_sum_within_closed_form(n: u32, alpha: u32, beta: u32) -> bool {
    let lhs = ln_big(&loop_sum_bound(n, alpha, beta));
    let rhs = 2.0 * n as f64 * gamma_bound(alpha, beta).ln();
    let slack = 1e-12 * (1.0 + rhs.abs());
    lhs + slack <= rhs - slack || (n == 0 && lhs == 0.0)
}

/// Bounds on `p_c` and `p_u` of `DL(alpha, beta)` with `alpha >= beta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundLedger {
    pub alpha: u32,
    pub beta: u32,
    /// Whether the inputs were given in the other order.
    pub swapped: bool,
    /// `1/(α+β-1)`, the maximal-degree bound.
    pub pc_lower: f64,
    pub pc_upper: f64,
    pub pu_lower: f64,
    pub pu_upper: f64,
    pub gamma: f64,
    /// `γ <= α`, which forces `p_c < p_u`.
    pub sufficient: bool,
}

/// Ledger for `DL(α, β)`; the parameters are swapped when `α < β`.
pub fn bound_ledger(alpha: u32, beta: u32) -> BoundLedger {
    let swapped = alpha < beta;
    let (alpha, beta) = if swapped { (beta, alpha) } else { (alpha, beta) };
    let gamma = gamma_bound(alpha, beta);
    BoundLedger {
        alpha,
        beta,
        swapped,
        pc_lower: 1.0 / (alpha + beta - 1) as f64,
        pc_upper: 1.0 / alpha as f64,
        pu_lower: 1.0 / gamma,
        pu_upper: 1.0 / beta as f64,
        gamma,
        sufficient: gamma <= alpha as f64,
    }
}

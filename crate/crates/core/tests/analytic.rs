use num_bigint::BigUint;
use proptest::prelude::*;

use perclab::analytic::{
    binomial, binomial_sum_bound, bound_ledger, gamma_bound, growth_constant, ln_big, loop_sum_bound,
    loop_sum_within_closed_form, q_asym_log, q_distinct_table, q_odd_table,
};

#[test]
fn partition_tables_agree_up_to_2000() {
    let d = q_distinct_table(2000);
    assert_eq!(d, q_odd_table(2000));
    // Known values of the distinct-parts partition function.
    assert_eq!(d[50], BigUint::from(3658u32));
    assert_eq!(d[100], BigUint::from(444_793u32));
    let ratio = (ln_big(&d[2000]) - q_asym_log(2000)).exp();
    assert!((0.9..=1.1).contains(&ratio), "{ratio}");
}

#[test]
fn binomial_sum_dominates_partitions() {
    let d = q_distinct_table(1000);
    for n in 1..=1000 {
        assert!(d[n] <= binomial_sum_bound(n as u64), "n = {n}");
    }
}

#[test]
fn growth_constant_is_two() {
    assert_eq!(growth_constant(1000), 2);
}

#[test]
fn loop_sums_within_closed_form() {
    for a in 2..=6 {
        for b in 2..=6 {
            for n in 0..=30 {
                assert!(loop_sum_within_closed_form(n, a, b), "({a},{b}) n={n}");
            }
        }
    }
}

#[test]
fn sufficient_condition_examples() {
    assert!(bound_ledger(6, 2).sufficient);
    for beta in 2..=5 {
        assert!(bound_ledger(4 * beta, beta).sufficient, "beta = {beta}");
    }
    assert!(!bound_ledger(3, 2).sufficient);
    assert!(!bound_ledger(2, 2).sufficient);
}

proptest! {
    #[test]
    fn ledger_values_are_ordered(a in 2u32..40, b in 2u32..40) {
        let l = bound_ledger(a, b);
        for x in [l.pc_lower, l.pc_upper, l.pu_lower, l.pu_upper] {
            prop_assert!(x > 0.0 && x <= 1.0);
        }
        prop_assert!(l.pc_lower <= l.pc_upper);
        prop_assert!(l.pu_lower <= l.pu_upper);
        prop_assert_eq!(l.gamma, gamma_bound(a.max(b), a.min(b)));
        prop_assert_eq!(l.gamma, gamma_bound(b, a));
    }

    #[test]
    fn loop_sum_is_a_binomial_half_sum(n in 0u32..12, a in 2u32..7, b in 2u32..7) {
        // Even-index terms of (√(ab) + √((a-1)(b-1)))^{2n} expansion.
        let (x, y) = (BigUint::from(a * b), BigUint::from((a - 1) * (b - 1)));
        let mut sum = BigUint::from(0u32);
        for k in 0..=n {
            sum += binomial(2 * n as u64, 2 * k as u64) * x.pow(n - k) * y.pow(k);
        }
        prop_assert_eq!(loop_sum_bound(n, a, b), sum);
    }
}

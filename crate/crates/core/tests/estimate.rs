use perclab::estimate::{
    distance_target, estimate_ascent, estimate_profile, estimate_statistic, fit_decay, inequality_suite, pc_crossing,
    pc_survival, McConfig, MCEstimate, Statistic, StatisticSpec, SurvivalTarget,
};
use perclab::graphs::{graph_distance, Distance, Family, HalfMode, Kernel};
use perclab::perc::{derive_seed, forward_profile, EdgeSampler, ProfileMode};
use perclab::Error;

fn kernel(family: Family) -> Kernel {
    Kernel::full(family).unwrap()
}

const DL32: Family = Family::Dl { alpha: 3, beta: 2 };

#[test]
fn tree_first_level_at_half() {
    let k = kernel(Family::Tree { d: 2 });
    let cfg = McConfig::new(10_000, 5).with_workers(1);
    let e1 = estimate_statistic(&k, &Statistic::E(1), 0.5, &cfg).unwrap();
    assert!(e1.agrees_with(1.0, 3.0), "{e1:?}");
    assert_eq!(e1.n_censored, 0);
}

#[test]
fn closed_configuration_gives_trivial_values() {
    let cfg = McConfig::new(50, 1);
    for family in [Family::Tree { d: 2 }, Family::Grandparent { d: 2 }, Family::Triangles, DL32, Family::LampWalk] {
        let k = kernel(family);
        let mut stats = vec![
            Statistic::E(0),
            Statistic::E(3),
            Statistic::AMinus(2),
            Statistic::VMinus(0),
            Statistic::Ascent(1),
            Statistic::Tau(distance_target(&k, 2).unwrap()),
            Statistic::Tau(k.origin()),
        ];
        if family.is_tree_based() {
            stats.push(Statistic::IsolatedTail(2));
        }
        for s in &stats {
            let est = estimate_statistic(&k, s, 0.0, &cfg).unwrap();
            assert_eq!(est.mean, s.trivial_value(&k.origin()) as f64, "{family} {s}");
            assert_eq!(est.stderr, 0.0);
        }
    }
}

#[test]
fn open_configuration_matches_deterministic_counts() {
    let cfg = McConfig::new(4, 9).with_budget(1 << 22);
    for family in [Family::Tree { d: 2 }, Family::Grandparent { d: 2 }, DL32] {
        let k = kernel(family);
        let det = forward_profile(&k, &mut EdgeSampler::new(0, 1.0), &k.origin(), 5, 1 << 22).unwrap();
        let est = estimate_profile(&k, ProfileMode::Forward, 5, 1.0, &cfg).unwrap();
        for (j, e) in est.iter().enumerate() {
            assert_eq!(e.mean, det.get(j).unwrap() as f64, "{family} k={j}");
            assert_eq!(e.stderr, 0.0);
        }
    }
    let tree = kernel(Family::Tree { d: 3 });
    let est = estimate_profile(&tree, ProfileMode::Forward, 4, 1.0, &cfg).unwrap();
    assert_eq!(est[4].mean, 81.0);
}

#[test]
fn estimates_are_reproducible_and_worker_independent() {
    let k = kernel(DL32);
    let base = McConfig::new(3000, 77);
    let stat = Statistic::AMinus(2);
    let a = estimate_statistic(&k, &stat, 0.2, &base.with_workers(1)).unwrap();
    let b = estimate_statistic(&k, &stat, 0.2, &base.with_workers(1)).unwrap();
    let c = estimate_statistic(&k, &stat, 0.2, &base.with_workers(3)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a, c);
    let other = estimate_statistic(&k, &stat, 0.2, &McConfig::new(3000, 78).with_workers(1)).unwrap();
    assert_ne!(a.mean, other.mean);
}

#[test]
fn coupled_replicas_are_monotone_in_p() {
    let k = kernel(Family::Grandparent { d: 2 });
    let o = k.origin();
    for i in 0..100 {
        let seed = derive_seed(3, i);
        let mut prev = vec![0u64; 5];
        for p in [0.1, 0.15, 0.2, 0.3] {
            let prof = forward_profile(&k, &mut EdgeSampler::new(seed, p), &o, 4, 1 << 20).unwrap();
            let cum: Vec<u64> = (0..=4).map(|j| prof.get(j).unwrap()).collect();
            for j in 0..5 {
                assert!(cum[j] >= prev[j], "replica {i} p={p} k={j}");
            }
            prev = cum;
        }
    }
}

#[test]
fn profile_agrees_with_single_statistics() {
    let k = kernel(DL32);
    let cfg = McConfig::new(500, 4).with_workers(2);
    let prof = estimate_profile(&k, ProfileMode::UpwardWindow, 3, 0.2, &cfg).unwrap();
    let single = estimate_statistic(&k, &Statistic::VMinus(3), 0.2, &cfg).unwrap();
    assert_eq!(prof[3], single);
    let asc = estimate_ascent(&k, 3, 0.2, &cfg).unwrap();
    let single = estimate_statistic(&k, &Statistic::Ascent(2), 0.2, &cfg).unwrap();
    assert_eq!(asc[2], single);
    assert_eq!(asc[0].mean, 1.0);
}

#[test]
fn tree_crossing_brackets_the_critical_point() {
    let k = kernel(Family::Tree { d: 2 });
    let est = pc_crossing(&k, 1, 1e-2, &McConfig::new(20_000, 2).with_workers(1)).unwrap();
    assert!((est.p_hat - 0.5).abs() <= 1e-2, "{est:?}");
    assert!(est.bracket.0 <= est.p_hat && est.p_hat <= est.bracket.1);
    assert!(est.stderr.is_finite() && est.stderr > 0.0);
    for w in est.probes.windows(2) {
        assert!(w[0].p != w[1].p);
    }
}

#[test]
fn crossing_needs_a_reachable_level() {
    let k = kernel(Family::Tree { d: 2 });
    assert!(matches!(pc_crossing(&k, 0, 1e-2, &McConfig::new(10, 1)), Err(Error::InvalidArgument(_))));
    assert!(pc_crossing(&k, 1, 0.0, &McConfig::new(10, 1)).is_err());
}

#[test]
fn survival_threshold_on_binary_tree() {
    let k = kernel(Family::Tree { d: 2 });
    let est = pc_survival(&k, 12, SurvivalTarget::Level(0.5), 1e-2, &McConfig::new(4000, 3).with_workers(1)).unwrap();
    assert!((0.45..=0.60).contains(&est.p_hat), "{est:?}");
    let halving = pc_survival(&k, 8, SurvivalTarget::Halving, 1e-2, &McConfig::new(4000, 3).with_workers(1)).unwrap();
    assert!((0.44..=0.56).contains(&halving.p_hat), "{halving:?}");
}

#[test]
fn survival_rejects_bad_arguments() {
    let k = kernel(Family::Tree { d: 2 });
    let cfg = McConfig::new(100, 1);
    assert!(pc_survival(&k, 3, SurvivalTarget::Halving, 1e-2, &cfg).is_err());
    assert!(pc_survival(&k, 8, SurvivalTarget::Level(1.0), 1e-2, &cfg).is_err());
    assert!(pc_survival(&k, 8, SurvivalTarget::Level(0.5), 1e-2, &McConfig::new(1, 1)).is_err());
}

#[test]
fn statistic_names_parse() {
    let cases = [
        ("e_3", Statistic::E(3)),
        ("band_2", Statistic::Band(2)),
        ("v_minus_4", Statistic::VMinus(4)),
        ("a_0", Statistic::AMinus(0)),
        ("w_minus_1", Statistic::WMinus(1)),
        ("A_5", Statistic::Ascent(5)),
        ("isolated_tail_2", Statistic::IsolatedTail(2)),
    ];
    for (s, stat) in cases {
        assert_eq!(s.parse::<StatisticSpec>().unwrap(), StatisticSpec::Fixed(stat.clone()));
        assert_eq!(stat.to_string(), s);
    }
    assert_eq!("tau_7".parse::<StatisticSpec>().unwrap(), StatisticSpec::TauAtDistance(7));
    for bad in ["e_", "e_x", "tau_-1", "foo_1", ""] {
        assert!(bad.parse::<StatisticSpec>().is_err(), "{bad}");
    }
}

#[test]
fn distance_targets_lie_at_the_stated_distance() {
    for family in [Family::Tree { d: 2 }, Family::Grandparent { d: 2 }, Family::Triangles, DL32, Family::LampDl] {
        let k = kernel(family);
        for d in 1..=5 {
            let y = distance_target(&k, d).unwrap();
            assert_eq!(graph_distance(&k, &k.origin(), &y, 12).unwrap(), Distance::Exact(d), "{family} d={d}");
        }
    }
    let walk = Kernel::new(Family::LampWalk, HalfMode::NonnegStreet).unwrap();
    let y = distance_target(&walk, 3).unwrap();
    assert_eq!(graph_distance(&walk, &walk.origin(), &y, 8).unwrap(), Distance::Exact(3));
}

#[test]
fn inequality_rows_cover_the_suite() {
    let k = kernel(DL32);
    let rows = inequality_suite(&k, 0.2, &McConfig::new(2000, 8).with_workers(1)).unwrap();
    assert_eq!(rows.iter().filter(|r| r.statistic == "e_k").count(), 9);
    assert_eq!(rows.iter().filter(|r| r.statistic == "v_minus_k").count(), 7);
    assert_eq!(rows.iter().filter(|r| r.statistic == "a_k").count(), 1);
    assert!(rows.iter().all(|r| r.pass), "{rows:?}");

    let gp = kernel(Family::Grandparent { d: 2 });
    let rows = inequality_suite(&gp, 0.1, &McConfig::new(2000, 8).with_workers(1)).unwrap();
    let bands: Vec<_> = rows.iter().filter(|r| r.statistic == "band_k").collect();
    assert_eq!(bands.len(), 3);
    assert!(bands.iter().all(|r| r.bound == 3.0 && r.pass));
}

#[test]
fn decay_fit_on_subcritical_connections() {
    let k = kernel(DL32);
    let cfg = McConfig::new(4000, 12).with_workers(1);
    let points: Vec<(f64, MCEstimate)> = (1..=5)
        .map(|d| {
            let y = distance_target(&k, d).unwrap();
            (d as f64, estimate_statistic(&k, &Statistic::Tau(y), 0.25, &cfg).unwrap())
        })
        .collect();
    let fit = fit_decay(&points).unwrap();
    assert!(fit.decays(3.0), "{fit:?}");
    assert!(fit.slope < 0.25f64.ln() + 0.3, "{fit:?}");
}

#[test]
fn invalid_parameters_are_rejected() {
    let k = kernel(Family::Tree { d: 2 });
    let cfg = McConfig::new(10, 1);
    assert!(estimate_statistic(&k, &Statistic::E(1), 1.5, &cfg).is_err());
    assert!(estimate_statistic(&k, &Statistic::E(1), f64::NAN, &cfg).is_err());
    assert!(estimate_statistic(&k, &Statistic::E(1), 0.5, &McConfig::new(1, 1)).is_err());
    assert!(estimate_statistic(&k, &Statistic::IsolatedTail(1), 0.5, &McConfig::new(10, 1)).is_ok());
    let dl = kernel(DL32);
    assert!(matches!(
        estimate_statistic(&dl, &Statistic::IsolatedTail(1), 0.5, &cfg),
        Err(Error::WrongFamily { .. })
    ));
}


use perclab::graphs::{pi1, Family, HalfMode, Kernel, Lattice, Truncation, TreeAddress, Vertex};
use perclab::perc::{
    band_occupancy, connections, explore, forward_constraint, forward_profile, full_profile, gw_offspring,
    isolated_height, reaches_level, survives, upward_profile, upward_set, Constraint, EdgeSampler, Reach, Status,
};

fn kernels() -> Vec<(Kernel, f64)> {
    let k = |f: Family, h: HalfMode| Kernel::new(f, h).unwrap();
    vec![
        (k(Family::Tree { d: 2 }, HalfMode::None), 0.5),
        (k(Family::Tree { d: 3 }, HalfMode::DescendantsOfOrigin), 0.4),
        (k(Family::Grandparent { d: 2 }, HalfMode::None), 0.25),
        (k(Family::Triangles, HalfMode::None), 0.35),
        (k(Family::Dl { alpha: 3, beta: 2 }, HalfMode::None), 0.3),
        (k(Family::Dl { alpha: 3, beta: 2 }, HalfMode::DescendantsOfOrigin), 0.33),
        (k(Family::LampDl, HalfMode::None), 0.45),
        (k(Family::LampWalk, HalfMode::None), 0.55),
        (k(Family::LampWalk, HalfMode::NonnegStreet), 0.6),
        (k(Family::LampWalk, HalfMode::Fibonacci), 0.7),
    ]
}

fn fib_member(kernel: &Kernel, v: &Vertex) -> bool {
    match (kernel.family, kernel.half, v) {
        (Family::LampWalk, HalfMode::NonnegStreet, Vertex::Lamp(g)) => g.right_flag().is_none_or(|r| r <= g.pos),
        _ => true,
    }
}

#[test]
fn closed_configuration_keeps_only_origin() {
    for (kernel, _) in kernels() {
        let o = kernel.origin();
        let r = explore(&kernel, &mut EdgeSampler::new(1, 0.0), &o, &Constraint::free(), 10).unwrap();
        assert_eq!(r.visited, vec![o.clone()]);
        assert_eq!(r.status, Status::Exhausted);
    }
}

#[test]
fn flat_window_on_tree_is_trivial() {
    let kernel = Kernel::full(Family::Tree { d: 2 }).unwrap();
    let o = kernel.origin();
    let c = Constraint::window(Some(0), Some(0)).with_subtree(TreeAddress::root());
    let r = explore(&kernel, &mut EdgeSampler::new(3, 1.0), &o, &c, 100).unwrap();
    assert_eq!(r.visited.len(), 1);
    assert!(r.is_exhausted());
}

#[test]
fn open_infinite_graph_hits_budget() {
    let kernel = Kernel::full(Family::Dl { alpha: 3, beta: 2 }).unwrap();
    let o = kernel.origin();
    let r = explore(&kernel, &mut EdgeSampler::new(3, 1.0), &o, &Constraint::free(), 100).unwrap();
    assert_eq!(r.status, Status::Truncated(100));
    assert_eq!(r.per_level.values().sum::<u64>() as usize, r.visited.len());
}

#[test]
fn origin_must_satisfy_constraint() {
    let kernel = Kernel::full(Family::Tree { d: 2 }).unwrap();
    let c = Constraint::window(Some(1), None);
    assert!(explore(&kernel, &mut EdgeSampler::new(0, 0.5), &kernel.origin(), &c, 10).is_err());
    assert!(explore(&kernel, &mut EdgeSampler::new(0, 0.5), &kernel.origin(), &Constraint::free(), 0).is_err());
}

#[test]
fn forward_profile_on_open_tree() {
    let kernel = Kernel::full(Family::Tree { d: 2 }).unwrap();
    let prof = forward_profile(&kernel, &mut EdgeSampler::new(9, 1.0), &kernel.origin(), 8, 1 << 20).unwrap();
    assert_eq!(prof.counts, (0..=8).map(|k| 1u64 << k).collect::<Vec<_>>());
    assert!(!prof.censored);
    assert_eq!(gw_offspring(&kernel, &mut EdgeSampler::new(9, 1.0), &kernel.origin(), 1, 100).unwrap(), Some(2));
    assert_eq!(gw_offspring(&kernel, &mut EdgeSampler::new(9, 0.0), &kernel.origin(), 3, 100).unwrap(), Some(0));
}

#[test]
fn level_zero_counts_are_one() {
    for (kernel, p) in kernels() {
        for seed in 0..20 {
            let prof = forward_profile(&kernel, &mut EdgeSampler::new(seed, p), &kernel.origin(), 3, 1 << 16).unwrap();
            if kernel.family == Family::LampWalk {
                // the toggle at the origin is a move inside level 0
                assert!(matches!(prof.get(0), Some(1 | 2)), "{kernel}");
            } else {
                assert_eq!(prof.get(0), Some(1), "{kernel}");
            }
        }
    }
}

#[test]
fn incremental_forward_matches_independent_windows() {
    let max_k = 5u32;
    for (kernel, p) in kernels() {
        let o = kernel.origin();
        for seed in 0..200u64 {
            let mut s = EdgeSampler::new(seed, p);
            let prof = forward_profile(&kernel, &mut s, &o, max_k, 1 << 18).unwrap();
            assert!(!prof.censored);
            for k in 0..=max_k {
                let c = forward_constraint(&kernel, &o, Some(k as i64));
                let r = explore(&kernel, &mut s, &o, &c, 1 << 18).unwrap();
                let direct =
                    r.visited.iter().filter(|v| v.level() == k as i64 && fib_member(&kernel, v)).count() as u64;
                assert_eq!(prof.get(k as usize), Some(direct), "{kernel} seed {seed} k {k}");
            }
        }
    }
}

#[test]
fn incremental_upward_matches_independent_windows() {
    let max_k = 4u32;
    for (kernel, p) in kernels() {
        if kernel.half != HalfMode::None {
            continue;
        }
        let o = kernel.origin();
        for seed in 0..100u64 {
            let mut s = EdgeSampler::new(seed, 0.8 * p);
            for free in [false, true] {
                let prof = upward_profile(&kernel, &mut s, &o, max_k, free, 1 << 12).unwrap();
                for k in 0..=max_k {
                    let mut c = Constraint::window(Some(-(k as i64)), if free { None } else { Some(0) });
                    if !free && kernel.family.is_tree_based() {
                        c = c.with_subtree(o.as_tree().unwrap().ancestor(k as u64));
                    }
                    let r = explore(&kernel, &mut s, &o, &c, 1 << 12).unwrap();
                    let Some(count) = prof.get(k as usize) else { break };
                    assert!(r.is_exhausted());
                    let direct = r.visited.iter().filter(|v| v.level() == -(k as i64)).count() as u64;
                    assert_eq!(count, direct, "{kernel} seed {seed} k {k} free {free}");
                    let set = upward_set(&kernel, &mut s, &o, k, free, 1 << 12).unwrap().unwrap();
                    assert_eq!(set.len() as u64, count);
                }
            }
        }
    }
}

#[test]
fn upward_trivial_cases() {
    let kernel = Kernel::full(Family::Dl { alpha: 3, beta: 2 }).unwrap();
    let o = kernel.origin();
    let prof = upward_profile(&kernel, &mut EdgeSampler::new(5, 0.3), &o, 0, true, 1000).unwrap();
    assert!(prof.get(0).unwrap() >= 1);
    let prof = upward_profile(&kernel, &mut EdgeSampler::new(5, 0.0), &o, 1, false, 1000).unwrap();
    assert_eq!(prof.get(1), Some(0));
}

#[test]
fn first_passage_matches_free_count() {
    let kernel = Kernel::full(Family::Dl { alpha: 3, beta: 2 }).unwrap();
    let o = kernel.origin();
    for seed in 0..300 {
        let mut s = EdgeSampler::new(seed, 0.28);
        let prof = upward_profile(&kernel, &mut s, &o, 3, true, 1 << 12).unwrap();
        for k in 0..=3i64 {
            let reach = reaches_level(&kernel, &mut s, &o, -k, &Constraint::free(), 1 << 12).unwrap();
            let Some(count) = prof.get(k as usize) else { continue };
            if reach != Reach::Censored {
                assert_eq!(reach == Reach::Reached, count > 0, "seed {seed} k {k}");
            }
        }
    }
}

#[test]
fn survival_agrees_with_profile() {
    for (kernel, p) in kernels() {
        let o = kernel.origin();
        for seed in 0..100 {
            let mut s = EdgeSampler::new(seed, p);
            let prof = forward_profile(&kernel, &mut s, &o, 6, 1 << 18).unwrap();
            let reach = survives(&kernel, &mut s, &o, 6, 1 << 18).unwrap();
            assert_eq!(reach == Reach::Reached, prof.get(6).unwrap() > 0, "{kernel} seed {seed}");
        }
        let mut all = EdgeSampler::new(0, 1.0);
        assert_eq!(survives(&kernel, &mut all, &o, 6, 1 << 18).unwrap(), Reach::Reached);
        let mut none = EdgeSampler::new(0, 0.0);
        assert_eq!(survives(&kernel, &mut none, &o, 6, 1 << 18).unwrap(), Reach::NotReached);
    }
}

#[test]
fn windowed_counts_bounded_by_cluster() {
    let kernel = Kernel::full(Family::Dl { alpha: 3, beta: 2 }).unwrap();
    let o = kernel.origin();
    for seed in 0..200 {
        let mut s = EdgeSampler::new(seed, 0.28);
        let full = explore(&kernel, &mut s, &o, &Constraint::free(), 1 << 13).unwrap();
        if !full.is_exhausted() {
            continue;
        }
        let fwd = forward_profile(&kernel, &mut s, &o, 6, 1 << 13).unwrap();
        for (k, &c) in fwd.counts.iter().enumerate() {
            assert!(c <= full.per_level.get(&(k as i64)).copied().unwrap_or(0));
        }
        let up = upward_profile(&kernel, &mut s, &o, 6, true, 1 << 13).unwrap();
        let w = full_profile(&kernel, &mut s, &o, 6, 1 << 13).unwrap();
        for k in 0..=6 {
            assert!(up.get(k).unwrap() <= w.get(k).unwrap());
            assert_eq!(w.get(k).unwrap(), full.per_level.get(&-(k as i64)).copied().unwrap_or(0));
        }
    }
}

#[test]
fn projection_fibres_are_bounded() {
    // |π1⁻¹[u] ∩ C| <= β^(k - ℓ1(u)) when every vertex of C has level <= k.
    let kernel = Kernel::full(Family::Dl { alpha: 3, beta: 2 }).unwrap();
    let o = kernel.origin();
    for seed in 0..300 {
        let r = explore(&kernel, &mut EdgeSampler::new(seed, 0.28), &o, &Constraint::free(), 1 << 13).unwrap();
        if !r.is_exhausted() {
            continue;
        }
        let top = r.visited.iter().map(Vertex::level).max().unwrap();
        let mut fibres = std::collections::HashMap::new();
        for v in &r.visited {
            *fibres.entry(pi1(v).unwrap()).or_insert(0u64) += 1;
        }
        for (u, n) in fibres {
            assert!(n <= 2u64.pow((top - u.level) as u32), "seed {seed}");
        }
    }
}

#[test]
fn coupling_is_monotone_on_truncations() {
    let cases = [
        (Family::Dl { alpha: 3, beta: 2 }, Truncation::new(3, Some(-2), Some(2))),
        (Family::Grandparent { d: 2 }, Truncation::new(3, None, None)),
        (Family::LampDl, Truncation::new(4, None, None)),
    ];
    for (family, trunc) in cases {
        let kernel = Kernel::full(family).unwrap();
        let g = trunc.build(&kernel, &kernel.origin()).unwrap();
        let lattice = g.to_lattice();
        let o = lattice.origin();
        for seed in 0..100 {
            let mut prev: Option<Vec<Vertex>> = None;
            for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let r = explore(&lattice, &mut EdgeSampler::new(seed, p), &o, &Constraint::free(), u64::MAX).unwrap();
                assert!(r.is_exhausted());
                let mut cur = r.visited;
                cur.sort();
                if let Some(prev) = &prev {
                    assert!(prev.iter().all(|v| cur.binary_search(v).is_ok()));
                }
                prev = Some(cur);
            }
        }
    }
}

#[test]
fn band_and_isolation_extremes() {
    let kernel = Kernel::full(Family::Grandparent { d: 2 }).unwrap();
    let o = kernel.origin();
    assert_eq!(band_occupancy(&kernel, &mut EdgeSampler::new(1, 0.0), &o, 2, 2, 100).unwrap(), Some(0));
    assert!(band_occupancy(&kernel, &mut EdgeSampler::new(1, 0.4), &o, 0, 2, 1 << 16).unwrap().unwrap() >= 1);
    assert_eq!(isolated_height(&kernel, &mut EdgeSampler::new(1, 0.0), &o, 5).unwrap(), Some(0));
    assert_eq!(isolated_height(&kernel, &mut EdgeSampler::new(1, 1.0), &o, 5).unwrap(), None);
    let dl = Kernel::full(Family::Dl { alpha: 2, beta: 2 }).unwrap();
    assert!(isolated_height(&dl, &mut EdgeSampler::new(1, 0.5), &dl.origin(), 5).is_err());
}

#[test]
fn isolation_matches_crossing_edges() {
    // Direct check on the ancestors' subtrees using the edge list of a ball.
    let kernel = Kernel::full(Family::Triangles).unwrap();
    let o = kernel.origin();
    let g = perclab::graphs::ball(&kernel, &o, 6).unwrap();
    for seed in 0..200 {
        let s = EdgeSampler::new(seed, 0.4);
        let mut expected = None;
        for t in 0..=2u64 {
            let v = o.as_tree().unwrap().ancestor(t);
            let open_crossing = g.edges.iter().any(|&(i, j)| {
                let (a, b) = (&g.vertices[i], &g.vertices[j]);
                let ia = a.as_tree().unwrap().is_descendant_of(&v);
                let ib = b.as_tree().unwrap().is_descendant_of(&v);
                ia != ib && s.uniform(a, b) < s.p
            });
            if !open_crossing {
                expected = Some(t as u32);
                break;
            }
        }
        assert_eq!(isolated_height(&kernel, &mut s.clone(), &o, 2).unwrap(), expected, "seed {seed}");
    }
}

#[test]
fn connection_indicators() {
    let kernel = Kernel::full(Family::Dl { alpha: 3, beta: 2 }).unwrap();
    let o = kernel.origin();
    let y = Vertex::Dl(o.as_dl().unwrap().down(0));
    let out = connections(&kernel, &mut EdgeSampler::new(0, 1.0), &o, &[o.clone(), y.clone()], 10).unwrap();
    assert_eq!(out, vec![Some(true), Some(true)]);
    let out = connections(&kernel, &mut EdgeSampler::new(0, 0.0), &o, &[o.clone(), y], 10).unwrap();
    assert_eq!(out, vec![Some(true), Some(false)]);
}

use std::collections::HashSet;

use proptest::prelude::*;

use perclab::graphs::{
    ball_with_limits, dl_of_lamp, lamp_of_dl, DlAddress, Family, HalfMode, Kernel, LampElement, TreeAddress, Vertex,
};
use perclab::perc::{edge_uniform, edge_uniform_between, EdgeKey};
use perclab::Error;

fn kernels() -> Vec<Kernel> {
    let full = [
        Family::Tree { d: 2 },
        Family::Tree { d: 3 },
        Family::Grandparent { d: 2 },
        Family::Triangles,
        Family::Dl { alpha: 3, beta: 2 },
        Family::Dl { alpha: 2, beta: 4 },
        Family::LampDl,
        Family::LampWalk,
    ];
    let mut out: Vec<Kernel> = full.iter().map(|&f| Kernel::full(f).unwrap()).collect();
    for (f, h) in [
        (Family::Grandparent { d: 2 }, HalfMode::DescendantsOfOrigin),
        (Family::Dl { alpha: 3, beta: 2 }, HalfMode::DescendantsOfOrigin),
        (Family::LampWalk, HalfMode::NonnegStreet),
        (Family::LampDl, HalfMode::NonnegStreet),
        (Family::LampWalk, HalfMode::Fibonacci),
    ] {
        out.push(Kernel::new(f, h).unwrap());
    }
    out
}

/// Endpoint of a walk from the origin whose i-th step takes neighbor
/// `steps[i] % degree`.
fn walk(kernel: &Kernel, steps: &[u32]) -> Vertex {
    let mut v = kernel.origin();
    for &s in steps {
        let nb = kernel.neighbors(&v).unwrap();
        if nb.is_empty() {
            break;
        }
        v = nb[s as usize % nb.len()].clone();
    }
    v
}

fn kernel_and_walk() -> impl Strategy<Value = (Kernel, Vec<u32>)> {
    let ks = kernels();
    (0..ks.len(), prop::collection::vec(any::<u32>(), 0..40)).prop_map(move |(i, s)| (ks[i], s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn codec_round_trip((kernel, steps) in kernel_and_walk()) {
        let v = walk(&kernel, &steps);
        prop_assert_eq!(Vertex::decode(&v.encode()).unwrap(), v.clone());
        for u in kernel.neighbors(&v).unwrap() {
            prop_assert_eq!(Vertex::decode(&u.encode()).unwrap(), u);
        }
    }

    #[test]
    fn edge_uniform_ignores_orientation((kernel, steps) in kernel_and_walk(), seed in any::<u64>()) {
        let v = walk(&kernel, &steps);
        for u in kernel.neighbors(&v).unwrap() {
            let a = edge_uniform_between(seed, &u, &v);
            prop_assert_eq!(a, edge_uniform_between(seed, &v, &u));
            prop_assert_eq!(a, edge_uniform(seed, &EdgeKey::new(&v, &u)));
            prop_assert!((0.0..1.0).contains(&a));
        }
    }

    #[test]
    fn dl_moves_keep_digits_in_range(
        (alpha, beta) in (2u8..6, 2u8..6),
        moves in prop::collection::vec((any::<bool>(), any::<u8>()), 1..2000),
    ) {
        let mut v = DlAddress::origin();
        for (down, x) in moves {
            let before = v.clone();
            if down {
                let c = x % alpha;
                v = v.down(c);
                // Undo with the beta-digit the move overwrote.
                prop_assert_eq!(v.up(before.digits.get(before.level)), before.clone());
            } else {
                let b = x % beta;
                v = v.up(b);
                prop_assert_eq!(v.down(before.digits.get(before.level - 1)), before.clone());
            }
            prop_assert!(v.validate(alpha, beta).is_ok());
            prop_assert_eq!(v.pi1().level, v.level);
            prop_assert_eq!(v.pi2().level, -v.level);
        }
    }

    #[test]
    fn lamp_and_dl_correspond(g in lamp()) {
        let v = dl_of_lamp(&g);
        prop_assert!(v.validate(2, 2).is_ok());
        prop_assert_eq!(lamp_of_dl(&v).unwrap(), g.clone());
        let lamp = Kernel::full(Family::LampDl).unwrap();
        let dl = Kernel::full(Family::Dl { alpha: 2, beta: 2 }).unwrap();
        let mut image: Vec<Vertex> = lamp
            .neighbors(&g.clone().into())
            .unwrap()
            .iter()
            .map(|h| dl_of_lamp(h.as_lamp().unwrap()).into())
            .collect();
        let mut expected = dl.neighbors(&v.into()).unwrap();
        image.sort();
        expected.sort();
        prop_assert_eq!(image, expected);
    }

    #[test]
    fn meet_level_matches_ancestor_search(a in tree_walk(), b in tree_walk()) {
        let m = a.meet_level(&b);
        prop_assert_eq!(m, b.meet_level(&a));
        prop_assert!(m <= a.level.min(b.level));
        let up = |t: &TreeAddress, level: i64| t.ancestor((t.level - level) as u64);
        prop_assert_eq!(up(&a, m), up(&b, m));
        // The deepest common ancestor: one level further down they differ.
        if m < a.level.min(b.level) {
            prop_assert_ne!(up(&a, m + 1), up(&b, m + 1));
        }
    }
}

proptest! {
    // About 4 neighbors per sample, so well over 10^4 pairs.
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn neighbors_are_symmetric((kernel, steps) in kernel_and_walk()) {
        let v = walk(&kernel, &steps);
        let nb = kernel.neighbors(&v).unwrap();
        let distinct: HashSet<_> = nb.iter().collect();
        prop_assert_eq!(distinct.len(), nb.len());
        prop_assert!(!distinct.contains(&v));
        if kernel.half == HalfMode::None {
            prop_assert_eq!(nb.len(), kernel.family.degree());
        }
        for u in &nb {
            prop_assert!(kernel.in_half(u).unwrap());
            prop_assert!(kernel.neighbors(u).unwrap().contains(&v), "{} not adjacent back to {}", u, v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn lamplighter_group_axioms(a in lamp(), b in lamp(), c in lamp()) {
        let e = LampElement::identity();
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&a.inv()), e.clone());
        prop_assert_eq!(a.inv().mul(&a), e.clone());
        prop_assert_eq!(a.mul(&e), a.clone());
        prop_assert_eq!(e.mul(&a), a.clone());
    }
}

fn lamp() -> impl Strategy<Value = LampElement> {
    (-20i64..20, prop::collection::btree_set(-12i64..12, 0..8)).prop_map(|(pos, lamps)| LampElement::new(pos, lamps))
}

fn tree_walk() -> impl Strategy<Value = TreeAddress> {
    prop::collection::vec(0u8..4, 0..30).prop_map(|steps| {
        steps.iter().fold(TreeAddress::root(), |t, &s| if s == 3 { t.parent() } else { t.child(s) })
    })
}

#[test]
fn encodings_are_injective_on_balls() {
    const MAX_VERTICES: usize = 400_000;
    for kernel in kernels() {
        let mut radius = 0;
        while radius < 12 {
            match ball_with_limits(&kernel, &kernel.origin(), radius + 1, 12, MAX_VERTICES) {
                Ok(_) => radius += 1,
                Err(Error::BallTooLarge { .. }) => break,
                Err(e) => panic!("{kernel}: {e}"),
            }
        }
        assert!(radius >= 6, "{kernel}: only radius {radius}");
        let ball = ball_with_limits(&kernel, &kernel.origin(), radius, 12, MAX_VERTICES).unwrap();
        let codes: HashSet<Vec<u8>> = ball.vertices.iter().map(Vertex::encode).collect();
        assert_eq!(codes.len(), ball.num_vertices(), "{kernel} radius {radius}");
    }
}

#[test]
fn encoding_layout_examples() {
    let child: Vertex = TreeAddress::root().child(1).into();
    // tag 1, level +1 -> 2, one entry, index +1 -> 2, digit 1
    assert_eq!(child.encode(), [1, 2, 1, 2, 1]);
    let up: Vertex = DlAddress::origin().up(1).into();
    // tag 2, level -1 -> 1, one entry at index -1 -> 1, digit 1
    assert_eq!(up.encode(), [2, 1, 1, 1, 1]);
    let g: Vertex = LampElement::new(-2, [64]).into();
    // 64 zig-zags to 128, which takes two varint bytes
    assert_eq!(g.encode(), [3, 3, 1, 0x80, 0x01, 1]);
}

/// The documented mixer, written out independently of the library.
fn reference_uniform(seed: u64, a: &[u8], b: &[u8]) -> u64 {
    fn sm(x: u64) -> u64 {
        let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    let mut msg = Vec::new();
    let mut n = lo.len() as u64;
    loop {
        let byte = (n & 0x7f) as u8;
        n >>= 7;
        if n == 0 {
            msg.push(byte);
            break;
        }
        msg.push(byte | 0x80);
    }
    msg.extend_from_slice(lo);
    msg.extend_from_slice(hi);
    let mut h = sm(seed ^ u64::from_be_bytes(*b"edge_u01"));
    for chunk in msg.chunks(8) {
        let mut w = [0u8; 8];
        w[..chunk.len()].copy_from_slice(chunk);
        h = sm(h ^ u64::from_le_bytes(w));
    }
    h = sm(h ^ msg.len() as u64);
    ((h >> 11) as f64 / (1u64 << 53) as f64).to_bits()
}

#[test]
fn edge_uniform_test_vectors() {
    let text = include_str!("data/edge_uniform_vectors.txt");
    let unhex = |s: &str| (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect::<Vec<u8>>();
    let mut count = 0;
    for line in text.lines().filter(|l| !l.is_empty()) {
        let f: Vec<&str> = line.split_whitespace().collect();
        let seed: u64 = f[0].parse().unwrap();
        let (u, v) = (Vertex::decode(&unhex(f[1])).unwrap(), Vertex::decode(&unhex(f[2])).unwrap());
        let bits = u64::from_str_radix(f[3], 16).unwrap();
        assert_eq!(edge_uniform_between(seed, &u, &v).to_bits(), bits, "{line}");
        assert_eq!(reference_uniform(seed, &unhex(f[1]), &unhex(f[2])), bits, "{line}");
        count += 1;
    }
    assert_eq!(count, 36);
}

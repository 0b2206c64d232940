use num_bigint::BigUint;
use proptest::prelude::*;
use subdyn::hierarchy::{
    build_hierarchy, djr_letter_frequencies, djr_ratio_limit, identity_checks, BlockKind,
    DjrBlocks, Family,
};
use subdyn::recognizer::same_orbit;
use subdyn::{Alphabet, Substitution};

fn expand_str(rules: [&str; 2], w: &str, n: u32) -> String {
    let mut s = w.to_string();
    for _ in 0..n {
        s = s.chars().map(|c| rules[(c == '1') as usize]).collect();
    }
    s
}

fn digits(w: &[u8]) -> String {
    Alphabet::digits(2).render(w)
}

/// B_1 = 010, B_{n+1} = B_n^{2^n} 1 B_n^{2^n}.
fn djr_str(n: u32) -> String {
    let mut b = "010".to_string();
    for k in 1..n {
        let half = b.repeat(1 << k);
        b = format!("{half}1{half}");
    }
    b
}

fn count_str(hay: &str, pat: &str) -> usize {
    (0..=hay.len().saturating_sub(pat.len()))
        .filter(|&i| hay[i..].starts_with(pat))
        .count()
}

#[test]
fn words_equal_iterated_images() {
    for (fam, rules) in [
        (Family::Theta, ["001", "11001"]),
        (Family::Eta, ["001", "11100"]),
    ] {
        let h = build_hierarchy(fam.clone(), 6).unwrap();
        for n in 1..=6 {
            let l = h.level(n).unwrap();
            assert_eq!(
                digits(l.a.as_ref().unwrap()),
                expand_str(rules, "00", n),
                "{fam:?} A_{n}"
            );
            assert_eq!(
                digits(l.b.as_ref().unwrap()),
                expand_str(rules, "1", n),
                "{fam:?} B_{n}"
            );
        }
    }
}

#[test]
fn theta_identities() {
    let h = build_hierarchy(Family::Theta, 9).unwrap();
    let mut prev_len: Option<usize> = None;
    for n in 1..=9 {
        let a = expand_str(["001", "11001"], "00", n);
        let b = expand_str(["001", "11001"], "1", n);
        let c = &a[2..];
        assert!(a.starts_with("00"));
        assert_eq!(&b[1..], c, "B_{n} = 1·C_{n}");
        assert!(b.starts_with('1'));
        let l = h.level(n).unwrap();
        assert_eq!(l.length, BigUint::from(c.len()));
        assert_eq!(digits(l.c.as_ref().unwrap()), c);
        if let Some(p) = prev_len {
            assert_eq!(c.len(), 4 * p + 4, "l_{n}");
        }
        prev_len = Some(c.len());
    }
    for n in 2..=8 {
        let c = h.level(n).unwrap().c.clone().unwrap();
        let c_prev = h.level(n - 1).unwrap().c.clone().unwrap();
        assert!(c.starts_with(&c_prev), "C_{n} starts with C_{}", n - 1);
    }
}

#[test]
fn eta_identities() {
    let h = build_hierarchy(Family::Eta, 9).unwrap();
    for n in 1..=9 {
        let a = expand_str(["001", "11100"], "00", n);
        let b = expand_str(["001", "11100"], "1", n);
        let l = h.level(n).unwrap();
        assert_eq!(l.length, BigUint::from(a.len()));
        assert_eq!(b.len() + 1, a.len());
        if n > 1 {
            let prev = expand_str(["001", "11100"], "00", n - 1).len();
            assert_eq!(a.len(), 4 * prev - 2, "l_{n}");
        }
    }
}

#[test]
fn lengths_beyond_materialization() {
    let t = build_hierarchy(Family::Theta, 40).unwrap();
    let e = build_hierarchy(Family::Eta, 40).unwrap();
    let mut lt = BigUint::from(4u32);
    let mut le = BigUint::from(6u32);
    for n in 2..=40 {
        lt = lt * 4u32 + 4u32;
        le = le * 4u32 - 2u32;
        assert_eq!(t.level(n).unwrap().length, lt);
        assert_eq!(e.level(n).unwrap().length, le);
    }
    assert!(!t.level(40).unwrap().materialized());
}

#[test]
fn identity_checks_pass_for_every_family() {
    let mut fams = vec![Family::Theta, Family::Eta, Family::Djr];
    fams.push(Family::general(Substitution::theta_tilde()).unwrap());
    for f in fams {
        let h = build_hierarchy(f.clone(), 6).unwrap();
        let checks = identity_checks(&h).unwrap();
        assert!(!checks.is_empty());
        for c in checks {
            assert!(c.passed, "{f:?}: {} {}", c.name, c.detail);
        }
    }
}

#[test]
fn general_family_needs_common_tail() {
    let h = build_hierarchy(Family::general(Substitution::theta_tilde()).unwrap(), 4).unwrap();
    let a = h.block(4, BlockKind::A).unwrap();
    let b = h.block(4, BlockKind::B).unwrap();
    assert_eq!(a[1..], b[1..]);
    assert_eq!((a[0], b[0]), (0, 1));
    assert!(Family::general(Substitution::eta_tilde()).is_err());
}

#[test]
fn djr_blocks_match_concatenation() {
    let h = build_hierarchy(Family::Djr, 6).unwrap();
    let blocks = DjrBlocks::new();
    for n in 1..=6 {
        let s = djr_str(n);
        let l = h.level(n).unwrap();
        assert_eq!(digits(l.b.as_ref().unwrap()), s, "B_{n}");
        assert_eq!(blocks.length(n), s.len() as u128);
        assert_eq!(l.alpha, BigUint::from(s.matches('0').count()));
        assert_eq!(l.beta, BigUint::from(s.matches('1').count()));
    }
    let hs: Vec<u128> = (1..=6).map(|n| blocks.length(n)).collect();
    assert_eq!(hs, vec![3, 13, 105, 1681, 53793, 3442753]);
}

#[test]
fn djr_counts_add_up() {
    let h = build_hierarchy(Family::Djr, 64).unwrap();
    let mut hn = BigUint::from(3u32);
    for n in 1..=64u32 {
        let l = h.level(n).unwrap();
        if n > 1 {
            hn = hn * (BigUint::from(1u32) << n) + 1u32;
        }
        assert_eq!(l.length, hn, "h_{n}");
        assert_eq!(&l.alpha + &l.beta, l.length, "α_{n} + β_{n}");
    }
}

#[test]
fn junction_counts_match_direct_counts() {
    let blocks = DjrBlocks::new();
    let b6 = djr_str(6);
    for pat in ["0", "1", "010", "0110", "00100", &djr_str(2), &djr_str(3)] {
        let p = Alphabet::digits(2).parse(pat).unwrap();
        for level in 2..=6 {
            let direct = count_str(&djr_str(level), pat);
            assert_eq!(
                blocks.count(&p, level).unwrap(),
                BigUint::from(direct),
                "{pat} in B_{level}"
            );
        }
        assert_eq!(
            blocks.count(&p, 6).unwrap(),
            BigUint::from(count_str(&b6, pat))
        );
    }
}

#[test]
fn block_measure_tends_to_one() {
    let blocks = DjrBlocks::new();
    for n in 1..=4u32 {
        let bn = blocks.word(n).unwrap();
        let mut last = 0.0;
        for big in n + 1..=8 {
            let c = blocks.count(bn, big).unwrap();
            let v = subdyn::hierarchy::ratio_f64(
                &(c * BigUint::from(blocks.length(n))),
                &DjrBlocks::big_length(big),
            );
            assert!(v >= last, "n={n} N={big}: {v} < {last}");
            last = v;
        }
        assert!(last >= 0.9, "h_{n} μ(B_{n}) = {last}");
    }
}

#[test]
fn djr_ratios() {
    let r = djr_ratio_limit(30, [1.0, subdyn::tiling::golden_conjugate()]).unwrap();
    assert!(r.monotone && r.bounded_by_one && r.differences_shrinking);
    let exact: Vec<f64> = [(1.0, 2.0), (5.0, 8.0), (41.0, 64.0)]
        .iter()
        .map(|(b, a)| b / a)
        .collect();
    for (got, want) in r.ratios.iter().zip(&exact) {
        assert_eq!(got, want);
    }
    let f = djr_letter_frequencies();
    assert!((f[0] + f[1] - 1.0).abs() < 1e-15);
    assert!(f[1] < f[0]);
}

#[test]
fn window_shift_is_found() {
    let h = build_hierarchy(Family::Theta, 7).unwrap();
    let x = h.window(7, BlockKind::A, 10_000, 2000).unwrap();
    for k in [-40i64, -1, 0, 3, 40] {
        let y = x.shifted(k).unwrap();
        assert_eq!(same_orbit(&x, &y, 50).unwrap(), Some(k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shifted_windows_read_the_same_symbols(center in 1000i64..20000, k in -200i64..200, i in -500i64..500) {
        let h = build_hierarchy(Family::Eta, 8).unwrap();
        let x = h.window(8, BlockKind::B, center, 800).unwrap();
        let y = x.shifted(k).unwrap();
        prop_assert_eq!(y.get(i), x.get(i + k));
    }

    #[test]
    fn djr_prefix_chain(n in 1u32..6) {
        let b = DjrBlocks::new();
        let (lo, hi) = (b.word(n).unwrap(), b.word(n + 1).unwrap());
        prop_assert!(hi.starts_with(lo) && hi.ends_with(lo));
    }
}

//! One PASS/FAIL line per acceptance criterion. Run with `--nocapture` to see
//! the report; the test fails if any criterion fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subdyn::hierarchy::{
    build_hierarchy, djr_ratio_limit, ratio_f64, BlockKind, DjrBlocks, Family, SequenceWindow,
};
use subdyn::lab::djr::djr_flow_point;
use subdyn::lab::*;
use subdyn::recognizer::{witness_intervals, Recognizer, WitnessCase, WitnessSearch};
use subdyn::tiling::{cylinder_measure, golden_conjugate, FlowCylinder, TileLengths, TilingPoint};
use subdyn::{Alphabet, Substitution, Word};

const SEED: u64 = 42;
const WINDOW: usize = 1_000_000;
const FREQ_TOL: f64 = 2e-3;
const PF_TOL: f64 = 1e-12;
const MASS_TOL: f64 = 1e-3;
const Z_TOL: f64 = 3.0;
const WITNESS_PAIRS: u64 = 100;
const BLOCK_MEASURE_MIN: f64 = 0.9;
const SHIFT_RIGIDITY_MIN: f64 = 0.9;
const FLOW_RIGIDITY_MIN: f64 = 0.85;
const NON_RIGID_MARGIN: f64 = 0.1;
const SPECTRAL_MAX: f64 = 0.05;
const ROTATION_PEAK_MIN: f64 = 0.2;
const DJR_FACTOR: f64 = 0.45;
const JOINING_MAX_DEV: f64 = 0.02;
const JOINING_PAIRS: u64 = 4;
const MARGINAL_TOL: f64 = 1e-3;
const CORR_MARGIN: f64 = 0.05;
const GENERIC_SHIFTS: usize = 400;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rules(fam: &Family) -> [&'static str; 2] {
    match fam {
        Family::Theta => ["001", "11001"],
        _ => ["001", "11100"],
    }
}

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

fn c1_hierarchy() -> Outcome {
    let mut lines = vec![];
    for fam in [Family::Theta, Family::Eta] {
        let h = build_hierarchy(fam.clone(), 5).map_err(|e| e.to_string())?;
        let r = rules(&fam);
        let mut prev = 0usize;
        for n in 1..=5 {
            let a = expand_str(r, "00", n);
            let b = expand_str(r, "1", n);
            let lvl = h.level(n).map_err(|e| e.to_string())?;
            ensure(digits(lvl.a.as_ref().unwrap()) == a, || {
                format!("{fam:?} A_{n} differs")
            })?;
            ensure(digits(lvl.b.as_ref().unwrap()) == b, || {
                format!("{fam:?} B_{n} differs")
            })?;
            if fam == Family::Theta {
                let c = &a[2..];
                ensure(a == format!("00{c}") && b == format!("1{c}"), || {
                    format!("A_{n}/B_{n} do not share C_{n}")
                })?;
                ensure(digits(lvl.c.as_ref().unwrap()) == c, || {
                    format!("C_{n} differs")
                })?;
                ensure(n == 1 || c.len() == 4 * prev + 4, || {
                    format!("l_{n} = {} vs 4·{prev}+4", c.len())
                })?;
                prev = c.len();
            } else {
                ensure(n == 1 || a.len() == 4 * prev - 2, || {
                    format!("l_{n} = {} vs 4·{prev}−2", a.len())
                })?;
                prev = a.len();
            }
        }
        lines.push(format!("{} l_5={prev}", fam.name()));
    }
    Ok(lines.join(", "))
}

/// Number of ways to write w = K1·blocks·K2 with K1 a proper suffix and K2 a
/// proper prefix of a block.
fn count_parses(blocks: [&str; 2], w: &str) -> usize {
    let proper_suffix = |s: &str| blocks.iter().any(|b| s.len() < b.len() && b.ends_with(s));
    let proper_prefix = |s: &str| blocks.iter().any(|b| s.len() < b.len() && b.starts_with(s));
    fn tail(blocks: [&str; 2], rest: &str, pp: &dyn Fn(&str) -> bool) -> usize {
        let mut n = usize::from(pp(rest));
        for b in blocks {
            if let Some(r) = rest.strip_prefix(b) {
                n += tail(blocks, r, pp);
            }
        }
        n
    }
    let longest = blocks.iter().map(|b| b.len()).max().unwrap() - 1;
    (0..=longest.min(w.len()))
        .filter(|&k| k == 0 || proper_suffix(&w[..k]))
        .map(|k| tail(blocks, &w[k..], &proper_prefix))
        .sum()
}

/// All length-`len` subwords of ζ⁸(0) and ζ⁸(1) by direct scan.
fn scanned(fam: &Family, len: usize) -> BTreeSet<String> {
    let r = rules(fam);
    let mut out = BTreeSet::new();
    for s in [expand_str(r, "0", 8), expand_str(r, "1", 8)] {
        for i in 0..=s.len() - len {
            out.insert(s[i..i + len].to_string());
        }
    }
    out
}

fn c2_parse() -> Outcome {
    let mut lines = vec![];
    for fam in [Family::Theta, Family::Eta] {
        let rec = Recognizer::new(&fam).map_err(|e| e.to_string())?;
        let m = rec.threshold();
        let blocks = [rules(&fam)[0].repeat(2), rules(&fam)[1].to_string()];
        let blocks = [blocks[0].as_str(), blocks[1].as_str()];
        let mut ambiguous = 0;
        for len in 1..=m + 12 {
            for w in scanned(&fam, len) {
                let k = count_parses(blocks, &w);
                let p = rec.parse_str(&w);
                if len >= m {
                    ensure(k == 1, || {
                        format!("{} word {w} has {k} decompositions", fam.name())
                    })?;
                    let p = p.map_err(|e| format!("{w}: {e}"))?;
                    ensure(p.unique, || format!("{w} reported ambiguous"))?;
                } else if k > 1 {
                    ambiguous = ambiguous.max(len);
                    ensure(p.map(|p| p.parse_count == k).unwrap_or(false), || {
                        format!("{w}: parse count differs from {k}")
                    })?;
                }
            }
        }
        ensure(ambiguous > 0, || {
            format!("{}: no ambiguous short word", fam.name())
        })?;
        let sub = rec.substitution().clone();
        let mut round = 0;
        for len in 1..=14 {
            for w in scanned(&fam, len) {
                let w = Alphabet::digits(2).parse(&w).unwrap();
                let img = sub.expand(&w, 1).map_err(|e| e.to_string())?;
                ensure(rec.preimages(&img) == vec![w.clone()], || {
                    format!("{}: round trip of {}", fam.name(), w.digits())
                })?;
                round += 1;
            }
        }
        lines.push(format!(
            "{} m={m} longest ambiguous={ambiguous} round trips={round}",
            fam.name()
        ));
    }
    Ok(lines.join(", "))
}

fn spell(h: &subdyn::hierarchy::BlockHierarchy, pattern: &str, n: u32) -> Vec<u8> {
    let a = h.block(n, BlockKind::A).unwrap();
    let b = h.block(n, BlockKind::B).unwrap();
    let c = &a[2..];
    match pattern {
        "C00C" => [c, &[0, 0], c].concat(),
        "C1C" => [c, &[1], c].concat(),
        p => p
            .chars()
            .flat_map(|ch| if ch == 'A' { a.to_vec() } else { b.to_vec() })
            .collect(),
    }
}

fn c3_witness() -> Outcome {
    let mut lines = vec![];
    for fam in [Family::Theta, Family::Eta] {
        let search = WitnessSearch::new(&fam).map_err(|e| e.to_string())?;
        let h = build_hierarchy(fam.clone(), 8).map_err(|e| e.to_string())?;
        let mut gamma_min = f64::INFINITY;
        for n in 3..=7u32 {
            for i in 0..WITNESS_PAIRS {
                let mut r = rng(SEED + 1000 * n as u64 + i);
                let s = search
                    .sample(&mut r, n, 16)
                    .map_err(|e| format!("{} n={n} pair {i}: {e}", fam.name()))?;
                let w = &s.witness;
                ensure(w.bounds_ok, || {
                    format!("{} n={n} pair {i}: bounds {:?}", fam.name(), w.bounds)
                })?;
                let (xp, yp) = (spell(&h, &w.x_pattern, w.n), spell(&h, &w.y_pattern, w.n));
                ensure(
                    s.x.slice(w.m1, w.m1 + xp.len() as i64) == Some(&xp[..]),
                    || format!("x pattern {} not at {}", w.x_pattern, w.m1),
                )?;
                ensure(
                    s.y.slice(w.m2, w.m2 + yp.len() as i64) == Some(&yp[..]),
                    || format!("y pattern {} not at {}", w.y_pattern, w.m2),
                )?;
                let iv = witness_intervals(w);
                ensure(iv.l.0 <= iv.m.0 && iv.m.1 <= iv.l.1, || {
                    format!("M ⊄ L at n={n} pair {i}")
                })?;
                ensure(
                    iv.l.0 <= iv.m.0 + iv.t_shift && iv.m.1 + iv.t_shift <= iv.l.1,
                    || format!("t+M ⊄ L at n={n} pair {i}"),
                )?;
                if w.case == WitnessCase::Theta00Vs1 {
                    let m = w.threshold;
                    ensure(iv.gamma.0 * 4 * (m + 4) >= iv.gamma.1, || {
                        format!("γ = {} below 1/(4(m+4)) at n={n} pair {i}", iv.gamma_value)
                    })?;
                }
                gamma_min = gamma_min.min(iv.gamma_value);
            }
        }
        lines.push(format!(
            "{} {} pairs, min γ={gamma_min:.4}",
            fam.name(),
            5 * WITNESS_PAIRS
        ));
    }
    Ok(lines.join(", "))
}

/// Exact θ word frequency from a long naive expansion.
fn scan_frequency(long: &str, u: &str) -> f64 {
    let n = long.len() - u.len() + 1;
    (0..n).filter(|&i| long[i..].starts_with(u)).count() as f64 / n as f64
}

fn c4_measure() -> Outcome {
    let lens = TileLengths::golden();
    let theta = Substitution::theta();
    let sys = System::from_spec("theta").map_err(|e| e.to_string())?;
    let mut r = rng(SEED);
    let span = WINDOW as f64;
    let tiles = (span / lens.of(1)) as usize + 100;
    let w = sys.sources()[0]
        .random_window(&mut r, 10, tiles)
        .map_err(|e| e.to_string())?;
    let p = TilingPoint::new(w, lens.clone(), 0.3).map_err(|e| e.to_string())?;
    let long = expand_str(["001", "11001"], "1", 10);
    let norm = 0.5 * (lens.of(0) + lens.of(1));
    let words: Vec<Word> = (1..=3)
        .flat_map(|k| theta.language().words_of_length(k))
        .collect();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let u = words[r.gen_range(0..words.len())].clone();
        let top = lens.of(u[0]);
        let a = r.gen_range(0.0..0.8 * top);
        let b = r.gen_range(a + 0.01..top);
        let cyl = FlowCylinder::new(u.clone(), a, b, &lens).map_err(|e| e.to_string())?;
        let formula = cylinder_measure(&theta, &lens, &cyl).map_err(|e| e.to_string())?;
        let oracle = scan_frequency(&long, &u.digits()) * (b - a) / norm;
        ensure((formula - oracle).abs() <= 1e-4, || {
            format!("{}: formula {formula} vs scan {oracle}", u.digits())
        })?;
        let e = birkhoff_flow(&p, &cyl, span).map_err(|e| e.to_string())?;
        let z = (e.value - formula).abs() / e.stderr_proxy;
        ensure(e.within(formula, Z_TOL), || {
            format!(
                "{} [{a:.3},{b:.3}): {} vs {formula}, z={z:.2}",
                u.digits(),
                e.value
            )
        })?;
        worst = worst.max(z);
    }
    let mut mass = 0.0;
    for a in 0..2u8 {
        mass += birkhoff_flow(&p, &FlowCylinder::letter(a, &lens), span)
            .map_err(|e| e.to_string())?
            .value;
    }
    ensure((mass - 1.0).abs() <= MASS_TOL, || {
        format!("letter mass {mass}")
    })?;
    Ok(format!(
        "20 cylinders, worst z={worst:.2}, letter mass={mass:.6}"
    ))
}

fn c5_pf() -> Outcome {
    let mut lines = vec![];
    for (spec, rules) in [("theta", ["001", "11001"]), ("eta", ["001", "11100"])] {
        let sys = System::from_spec(spec).map_err(|e| e.to_string())?;
        let sub = sys.substitution_ref().unwrap();
        let count = |img: &str, c: char| img.chars().filter(|&x| x == c).count() as f64;
        let (m00, m01, m10, m11) = (
            count(rules[0], '0'),
            count(rules[1], '0'),
            count(rules[0], '1'),
            count(rules[1], '1'),
        );
        let tr = m00 + m11;
        let lambda = (tr + (tr * tr - 4.0 * (m00 * m11 - m01 * m10)).sqrt()) / 2.0;
        let v = [
            m01 / (m01 + lambda - m00),
            (lambda - m00) / (m01 + lambda - m00),
        ];
        let pf = sub.pf_frequencies().map_err(|e| e.to_string())?;
        for a in 0..2 {
            ensure(
                (pf.frequencies[a] - v[a]).abs() <= PF_TOL && (v[a] - 0.5).abs() <= PF_TOL,
                || format!("{spec}: {:?} vs {v:?}", pf.frequencies),
            )?;
        }
        let x = sys
            .random_window(&mut rng(SEED), 0, WINDOW)
            .map_err(|e| e.to_string())?;
        let mut emp = [0.0; 2];
        for a in 0..2u8 {
            emp[a as usize] = birkhoff(&x, &[a]).map_err(|e| e.to_string())?.value;
            ensure((emp[a as usize] - 0.5).abs() <= FREQ_TOL, || {
                format!("{spec} letter {a}: {}", emp[a as usize])
            })?;
        }
        lines.push(format!(
            "{spec} λ={lambda} empirical=({:.5}, {:.5})",
            emp[0], emp[1]
        ));
    }
    Ok(lines.join(", "))
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

fn c6_djr_arithmetic() -> Outcome {
    let blocks = DjrBlocks::new();
    let h = build_hierarchy(Family::Djr, 4).map_err(|e| e.to_string())?;
    let mut hn: u128 = 3;
    for n in 1..=4u32 {
        let s = djr_str(n);
        if n > 1 {
            hn = hn * (1 << n) + 1;
        }
        let l = h.level(n).map_err(|e| e.to_string())?;
        ensure(digits(l.b.as_ref().unwrap()) == s, || {
            format!("B_{n} differs")
        })?;
        ensure(s.len() as u128 == hn && blocks.length(n) == hn, || {
            format!("h_{n}: {} vs {hn}", s.len())
        })?;
        ensure(
            l.alpha == BigUint::from(s.matches('0').count())
                && l.beta == BigUint::from(s.matches('1').count()),
            || format!("α_{n}, β_{n}"),
        )?;
    }
    let mut finals = vec![];
    for n in 1..=4u32 {
        let bn = blocks.word(n).unwrap();
        let mut last = 0.0;
        for big in n + 1..=8 {
            let c = blocks.count(bn, big).map_err(|e| e.to_string())?;
            let v = ratio_f64(
                &(c * BigUint::from(blocks.length(n))),
                &DjrBlocks::big_length(big),
            );
            ensure(v >= last, || {
                format!("h_{n}μ(B_{n}) decreased at N={big}: {v} < {last}")
            })?;
            last = v;
        }
        ensure(last >= BLOCK_MEASURE_MIN, || {
            format!("h_{n}μ(B_{n}) in B_8 = {last}")
        })?;
        finals.push(format!("{last:.4}"));
    }
    let r = djr_ratio_limit(12, [1.0, golden_conjugate()]).map_err(|e| e.to_string())?;
    ensure(r.monotone && r.bounded_by_one, || {
        format!("β_n/α_n {:?}", r.ratios)
    })?;
    ensure(r.differences_shrinking, || {
        format!("t_n/h_n differences {:?}", r.tile_differences)
    })?;
    Ok(format!(
        "h_nμ(B_n) in B_8 = [{}], β/α → {:.6}",
        finals.join(", "),
        r.limit
    ))
}

fn c7_rigidity() -> Outcome {
    let blocks = DjrBlocks::new();
    let times: Vec<u64> = (3..=6).map(|n| blocks.length(n) as u64).collect();
    let b2 = blocks.word(2).unwrap().clone();
    let mut r = rng(SEED);
    let djr = System::djr();
    let w = djr
        .random_window(&mut r, 0, 12_000_000)
        .map_err(|e| e.to_string())?;
    let shift = rigidity_test(&w, &b2, &times).map_err(|e| e.to_string())?;
    let lens = TileLengths::golden();
    let tn: Vec<f64> = (3..=6)
        .map(|n| blocks.word(n).unwrap().iter().map(|&a| lens.of(a)).sum())
        .collect();
    let p = djr_flow_point(&djr, &mut r, &lens, 8_000_000.0).map_err(|e| e.to_string())?;
    let cyl = FlowCylinder::new((*b2).clone(), 0.0, 1.0, &lens).map_err(|e| e.to_string())?;
    let flow = flow_rigidity_test(&p, &cyl, &tn, 4_000_000.0).map_err(|e| e.to_string())?;
    let theta = System::from_spec("theta").map_err(|e| e.to_string())?;
    let c2 = build_hierarchy(Family::Theta, 2)
        .unwrap()
        .level(2)
        .unwrap()
        .c
        .clone()
        .unwrap();
    let wt = theta
        .random_window(&mut r, 0, 5_000_000)
        .map_err(|e| e.to_string())?;
    let th = rigidity_test(&wt, &c2, &times).map_err(|e| e.to_string())?;
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.3}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let report = format!(
        "djr shift [{}], djr flow [{}], theta [{}] vs μ+{NON_RIGID_MARGIN}={:.4}",
        fmt(&shift.ratios),
        fmt(&flow.ratios),
        fmt(&th.ratios),
        th.measure.value + NON_RIGID_MARGIN
    );
    ensure(*shift.ratios.last().unwrap() >= SHIFT_RIGIDITY_MIN, || {
        format!("shift ratio at h_6 below {SHIFT_RIGIDITY_MIN}: {report}")
    })?;
    ensure(*flow.ratios.last().unwrap() >= FLOW_RIGIDITY_MIN, || {
        format!("flow ratio at t_6 below {FLOW_RIGIDITY_MIN}: {report}")
    })?;
    ensure(
        th.ratios
            .iter()
            .all(|&q| q < th.measure.value + NON_RIGID_MARGIN),
        || format!("θ ratios exceed μ+{NON_RIGID_MARGIN}: {report}"),
    )?;
    Ok(report)
}

fn c8_weak_mixing() -> Outcome {
    let grid: Vec<f64> = rational_grid(8).into_iter().filter(|&l| l != 0.0).collect();
    let mut lines = vec![];
    for spec in ["theta", "eta"] {
        let sys = System::from_spec(spec).map_err(|e| e.to_string())?;
        let big = sys
            .random_window(&mut rng(SEED), 0, 4 * WINDOW)
            .map_err(|e| e.to_string())?;
        let start = (-big.lo()) as usize - WINDOW / 2;
        let middle = big.symbols()[start..start + WINDOW].to_vec();
        let small = SequenceWindow::new(
            middle,
            -(WINDOW as i64) / 2,
            big.provenance.clone(),
            big.alphabet.clone(),
        )
        .map_err(|e| e.to_string())?;
        for u in [vec![0u8], vec![1u8]] {
            let a = spectral_scan(&small, &u, &grid)
                .map_err(|e| e.to_string())?
                .max_away_from_zero(1e-9)
                .unwrap();
            let b = spectral_scan(&big, &u, &grid)
                .map_err(|e| e.to_string())?
                .max_away_from_zero(1e-9)
                .unwrap();
            ensure(a.1 < SPECTRAL_MAX, || {
                format!("{spec} [{}] max {:.4} at λ={:.4}", digits(&u), a.1, a.0)
            })?;
            ensure(b.1 < a.1, || {
                format!(
                    "{spec} [{}] max rose from {:.4} to {:.4} on quadrupling",
                    digits(&u),
                    a.1,
                    b.1
                )
            })?;
            lines.push(format!("{spec}[{}] {:.4}→{:.4}", digits(&u), a.1, b.1));
        }
    }
    let alpha = golden_conjugate();
    let mut rgrid = grid.clone();
    rgrid.push(alpha);
    let rot = spectral_scan_rotation(alpha, 0.2, (0.0, 0.5), WINDOW, &rgrid);
    let peak = rot.at(alpha).unwrap();
    ensure(peak > ROTATION_PEAK_MIN, || format!("rotation peak {peak}"))?;
    let rep = subdyn::lab::djr::djr_weak_mixing_experiment(&TileLengths::golden(), 5)
        .map_err(|e| e.to_string())?;
    for l in &rep.levels {
        ensure(
            l.nu_e >= DJR_FACTOR * rep.d && l.nu_f >= DJR_FACTOR * rep.d,
            || format!("n={}: ν(E)={} ν(F)={} d={}", l.n, l.nu_e, l.nu_f, rep.d),
        )?;
        ensure(
            l.insert_displacement == subdyn::tiling::BoundaryCoords::new(0, 1),
            || format!("n={}: inserted 1 moves {:?}", l.n, l.insert_displacement),
        )?;
    }
    ensure(
        rep.levels.iter().map(|l| l.n).collect::<Vec<_>>() == vec![3, 4, 5],
        || "levels".into(),
    )?;
    Ok(format!(
        "{}, rotation peak={peak:.4}, djr levels 3..5 ok",
        lines.join(" ")
    ))
}

fn c9_joining() -> Outcome {
    let theta = System::from_spec("theta").map_err(|e| e.to_string())?;
    let ps: Vec<Word> = theta
        .substitution_ref()
        .unwrap()
        .language()
        .words_of_length(2)
        .into_iter()
        .collect();
    ensure(ps.len() * ps.len() == 16, || {
        format!("{} cylinder pairs", ps.len() * ps.len())
    })?;
    let x = theta
        .random_window(&mut rng(SEED), 0, 100_000 + 200)
        .map_err(|e| e.to_string())?;
    for k in -50i64..=50 {
        let y = x.shifted(k).map_err(|e| e.to_string())?;
        let j = joining_estimate(&x, &y, &ps, &ps, None, 60).map_err(|e| e.to_string())?;
        ensure(j.classification == JoiningClass::OffDiagonal(k), || {
            format!("shift {k} classified {:?}", j.classification)
        })?;
    }
    let mut devs = vec![];
    let mut failures = vec![];
    for seed in 0..JOINING_PAIRS {
        let mut r = rng(SEED + seed);
        let x = theta
            .random_window(&mut r, 0, WINDOW)
            .map_err(|e| e.to_string())?;
        let y = theta
            .random_window(&mut r, 1, WINDOW)
            .map_err(|e| e.to_string())?;
        let j = joining_estimate(&x, &y, &ps, &ps, Some(JOINING_MAX_DEV), 50)
            .map_err(|e| e.to_string())?;
        ensure(j.marginal_deviation <= MARGINAL_TOL, || {
            format!("pair {seed}: marginal deviation {}", j.marginal_deviation)
        })?;
        devs.push(format!("{:.4}", j.max_deviation));
        if j.classification != JoiningClass::ProductConsistent || j.max_deviation >= JOINING_MAX_DEV
        {
            failures.push(format!(
                "pair {seed} {:?} max_deviation={:.4}",
                j.classification, j.max_deviation
            ));
        }
    }
    let report = format!(
        "off-diagonal k=−50..50 ok; non-aligned max deviations [{}] vs {JOINING_MAX_DEV}",
        devs.join(", ")
    );
    ensure(failures.is_empty(), || {
        format!("{report}; {}", failures.join("; "))
    })?;
    Ok(report)
}

fn c10_correlation() -> Outcome {
    let theta = System::from_spec("theta").map_err(|e| e.to_string())?;
    let h = build_hierarchy(Family::Theta, 7).map_err(|e| e.to_string())?;
    let c2 = h.level(2).unwrap().c.clone().unwrap();
    let mu = theta.word_frequency(&c2).map_err(|e| e.to_string())?;
    let floor = mu * mu + CORR_MARGIN * mu;
    let mut r = rng(SEED);
    let x = theta
        .random_window(&mut r, 0, WINDOW)
        .map_err(|e| e.to_string())?;
    let ks: Vec<i64> = (3..=7)
        .map(|n| h.block(n, BlockKind::A).unwrap().len() as i64)
        .collect();
    let c = correlation_sequence(&x, &c2, &ks).map_err(|e| e.to_string())?;
    for (k, e) in ks.iter().zip(&c) {
        ensure(e.value > floor, || format!("k={k}: {} ≤ {floor}", e.value))?;
    }
    let generic: Vec<i64> = (0..GENERIC_SHIFTS)
        .map(|_| r.gen_range(1_000..100_000))
        .collect();
    let g = correlation_sequence(&x, &c2, &generic).map_err(|e| e.to_string())?;
    let vals: Vec<f64> = g.iter().map(|e| e.value).collect();
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
    let sem = (var / vals.len() as f64).sqrt();
    ensure((mean - mu * mu).abs() <= 3.0 * sem, || {
        format!(
            "generic mean {mean:.3e} vs μ²={:.3e} (sem {sem:.1e})",
            mu * mu
        )
    })?;
    let at = c
        .iter()
        .map(|e| format!("{:.4}", e.value))
        .collect::<Vec<_>>()
        .join(" ");
    Ok(format!(
        "μ={mu:.5}, floor={floor:.3e}, at l(A_n): [{at}], generic mean={mean:.3e} vs μ²={:.3e}",
        mu * mu
    ))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("hierarchy exactness", Duration::from_secs(1), c1_hierarchy),
        ("parse uniqueness", Duration::from_secs(60), c2_parse),
        ("structure witnesses", Duration::from_secs(300), c3_witness),
        (
            "flow invariant measure",
            Duration::from_secs(120),
            c4_measure,
        ),
        ("letter frequencies", Duration::from_secs(30), c5_pf),
        (
            "rank-one arithmetic",
            Duration::from_secs(120),
            c6_djr_arithmetic,
        ),
        ("rigidity dichotomy", Duration::from_secs(300), c7_rigidity),
        (
            "weak-mixing scans",
            Duration::from_secs(600),
            c8_weak_mixing,
        ),
        (
            "joining classification",
            Duration::from_secs(300),
            c9_joining,
        ),
        (
            "non-strong-mixing signature",
            Duration::from_secs(120),
            c10_correlation,
        ),
    ];
    let mut failed = vec![];
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let mut outcome = run();
        let elapsed = t.elapsed();
        if outcome.is_ok() && elapsed > *budget {
            outcome = Err(format!("took {elapsed:.2?}, budget {budget:?}"));
        }
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({elapsed:.2?}): {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {:>2} {name} ({elapsed:.2?}): {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use subdyn::error::invalid;
use subdyn::hierarchy::{build_hierarchy, djr_ratio_limit, identity_checks, DjrBlocks, Family};
use subdyn::lab::djr::{djr_flow_point, whole_space};
use subdyn::lab::estimate::{birkhoff_flow, occurrence_marks};
use subdyn::lab::*;
use subdyn::recognizer::{Recognizer, WitnessSearch};
use subdyn::tiling::{
    cylinder_measure_from, BoundaryCoords, FlowCylinder, TileLengths, TilingPoint,
};
use subdyn::word::{letter_counts, Word};
use subdyn::{Alphabet, Error, Result};

use crate::config::ExperimentConfig;
use crate::report::{Check, Table};
use crate::Command;

pub struct CommandResult {
    pub checks: Vec<Check>,
    pub payload: Value,
    pub table: Table,
}

fn result(checks: Vec<Check>, payload: Value, table: Table) -> Result<CommandResult> {
    Ok(CommandResult {
        checks,
        payload,
        table,
    })
}

pub fn dispatch(cmd: &Command, cfg: &ExperimentConfig) -> Result<CommandResult> {
    match cmd {
        Command::Expand { word, power } => expand(cfg, word, *power),
        Command::Blocks => blocks(cfg),
        Command::Parse { word } => parse(cfg, word),
        Command::Structure { level } => structure(cfg, *level),
        Command::TilingMeasure { word, interval } => tiling_measure(cfg, word, interval),
        Command::Orbit { t_max, step } => orbit(cfg, *t_max, *step),
        Command::Freq { word } => freq(cfg, word),
        Command::Correlate { word, shifts } => correlate(cfg, word.as_deref(), shifts),
        Command::Spectrum { word, flow, max_q } => spectrum(cfg, word, *flow, *max_q),
        Command::Rigidity { word, times, flow } => rigidity(cfg, word.as_deref(), times, *flow),
        Command::Joining { length, shift } => joining(cfg, *length, *shift),
        Command::DjrWm => djr_wm(cfg),
        Command::VerifyAll => verify_all(cfg),
    }
}

fn system(cfg: &ExperimentConfig) -> Result<System> {
    System::from_spec(&cfg.family)
}

/// The block-hierarchy family behind a system, when it has one.
fn family(sys: &System) -> Option<Family> {
    match sys.name() {
        "theta" => Some(Family::Theta),
        "eta" => Some(Family::Eta),
        "djr" => Some(Family::Djr),
        _ => sys
            .substitution_ref()
            .and_then(|s| Family::general(s.clone()).ok()),
    }
}

fn require_family(sys: &System) -> Result<Family> {
    family(sys).ok_or_else(|| Error::InvalidInput(format!("{} has no block hierarchy", sys.name())))
}

fn rng(cfg: &ExperimentConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn lengths(cfg: &ExperimentConfig) -> Result<TileLengths> {
    cfg.alpha.lengths()
}

fn word(alphabet: &Alphabet, text: &str) -> Result<Word> {
    let w = alphabet.parse(text)?;
    if w.is_empty() {
        return invalid("word must be nonempty");
    }
    Ok(w)
}

fn exact_frequency(sys: &System, u: &[u8]) -> Result<f64> {
    if u.len() == 1 {
        return Ok(sys.letter_frequencies()?[u[0] as usize]);
    }
    sys.word_frequency(u)
}

fn require_admissible(sys: &System, u: &[u8]) -> Result<f64> {
    let f = exact_frequency(sys, u)?;
    if f <= 0.0 {
        return invalid(format!(
            "{} is not admissible for {}",
            sys.alphabet().render(u),
            sys.name()
        ));
    }
    Ok(f)
}

/// All words of length k with positive frequency.
fn admissible_words(sys: &System, k: usize) -> Result<Vec<Word>> {
    match sys.substitution_ref() {
        Some(s) => Ok(s.language().words_of_length(k).into_iter().collect()),
        None => {
            let mut out = Vec::new();
            for code in 0..(1u32 << k) {
                let w = Word::new((0..k).map(|i| ((code >> (k - 1 - i)) & 1) as u8).collect());
                if sys.word_frequency(&w)? > 0.0 {
                    out.push(w);
                }
            }
            Ok(out)
        }
    }
}

fn measure_of(sys: &System, lens: &TileLengths, cyl: &FlowCylinder) -> Result<f64> {
    let mu = require_admissible(sys, &cyl.word)?;
    Ok(cylinder_measure_from(
        mu,
        &sys.letter_frequencies()?,
        lens,
        cyl,
    ))
}

/// A tiling whose window covers `span` time units ahead and a little behind.
fn flow_point(
    sys: &System,
    rng: &mut ChaCha8Rng,
    lens: &TileLengths,
    span: f64,
) -> Result<TilingPoint> {
    if sys.alphabet().size() != 2 {
        return invalid("tiling flows need a two-letter alphabet");
    }
    djr_flow_point(sys, rng, lens, span)
}

fn default_block(sys: &System) -> Result<Word> {
    let fam = require_family(sys)?;
    let h = build_hierarchy(fam.clone(), 2)?;
    let l = h.level(2)?;
    Ok((**l.c.as_ref().or(l.b.as_ref()).or(l.a.as_ref()).unwrap()).clone())
}

fn default_shift_times(sys: &System) -> Result<Vec<u64>> {
    let fam = require_family(sys)?;
    if fam == Family::Djr {
        let b = DjrBlocks::new();
        return Ok((3..=6).map(|n| b.length(n) as u64).collect());
    }
    let h = build_hierarchy(fam, 7)?;
    (3..=7)
        .map(|n| h.primary_block(n).map(|w| w.len() as u64))
        .collect()
}

fn expand(cfg: &ExperimentConfig, text: &str, power: u32) -> Result<CommandResult> {
    let sys = system(cfg)?;
    let sub = sys.substitution_ref().ok_or_else(|| {
        Error::InvalidInput(format!("{} is not a stationary substitution", sys.name()))
    })?;
    let w = word(sub.alphabet(), text)?;
    let image = sub.expand(&w, power)?;
    let rendered = sub.alphabet().render(&image);
    let mut t = Table::new(&["word", "power", "result"]);
    t.push(vec![text.to_string(), power.to_string(), rendered.clone()]);
    result(
        vec![],
        json!({"word": text, "power": power, "result": rendered, "length": image.len()}),
        t,
    )
}

fn blocks(cfg: &ExperimentConfig) -> Result<CommandResult> {
    let sys = system(cfg)?;
    let fam = require_family(&sys)?;
    let h = build_hierarchy(fam, cfg.depth)?;
    let alphabet = sys.alphabet();
    let render = |w: Option<&std::sync::Arc<Word>>| {
        w.filter(|w| w.len() <= 4096).map(|w| alphabet.render(w))
    };
    let mut t = Table::new(&["n", "length", "alpha", "beta"]);
    let mut levels = Vec::new();
    for l in h.levels() {
        t.push(vec![
            l.n.to_string(),
            l.length.to_string(),
            l.alpha.to_string(),
            l.beta.to_string(),
        ]);
        levels.push(json!({
            "n": l.n,
            "length": l.length.to_string(),
            "alpha": l.alpha.to_string(),
            "beta": l.beta.to_string(),
            "a": render(l.a.as_ref()),
            "b": render(l.b.as_ref()),
            "c": render(l.c.as_ref()),
        }));
    }
    let checks = identity_checks(&h)?
        .into_iter()
        .map(|c| Check::new(&format!("hierarchy.{}", c.name), c.passed, c.detail))
        .collect();
    result(checks, json!({"levels": levels}), t)
}

fn parse(cfg: &ExperimentConfig, text: &str) -> Result<CommandResult> {
    let sys = system(cfg)?;
    let fam = require_family(&sys)?;
    if fam == Family::Djr {
        return invalid("the DJR system has no desubstitution parser");
    }
    let rec = Recognizer::new(&fam)?;
    let w = word(rec.alphabet(), text)?;
    let p = rec.parse(&w)?;
    let mut t = Table::new(&["part", "start", "text"]);
    t.push(vec!["K1".into(), "0".into(), p.k1.clone()]);
    for it in &p.items {
        t.push(vec![
            format!("block{}", it.block),
            it.start.to_string(),
            format!("{}{}", it.v, it.c),
        ]);
    }
    t.push(vec![
        "K2".into(),
        (w.len() - p.k2.len()).to_string(),
        p.k2.clone(),
    ]);
    let checks = vec![Check::new(
        "recognizer.threshold_uniqueness",
        p.unique || w.len() < rec.threshold(),
        format!("{} parses, threshold {}", p.parse_count, rec.threshold()),
    )];
    result(checks, json!({"threshold": rec.threshold(), "parse": p}), t)
}

fn structure(cfg: &ExperimentConfig, level: u32) -> Result<CommandResult> {
    let sys = system(cfg)?;
    let fam = require_family(&sys)?;
    let ws = WitnessSearch::new(&fam)?;
    let s = ws.sample(&mut rng(cfg), level, 16)?;
    let w = &s.witness;
    let mut t = Table::new(&["n", "case", "k_align", "m1", "m2", "gamma", "bounds_ok"]);
    t.push(vec![
        w.n.to_string(),
        format!("{:?}", w.case),
        w.k_align.to_string(),
        w.m1.to_string(),
        w.m2.to_string(),
        w.intervals.gamma_value.to_string(),
        w.bounds_ok.to_string(),
    ]);
    let checks = vec![
        Check::new(
            "recognizer.bounds_ok",
            w.bounds_ok,
            format!("case {:?} at level {}", w.case, w.n),
        ),
        Check::new(
            "recognizer.patterns_verified",
            w.bounds.patterns_verified,
            "",
        ),
    ];
    result(
        checks,
        json!({"witness": w, "resamples": s.resamples, "half_width": s.half_width}),
        t,
    )
}

fn parse_interval(text: &str) -> Result<(f64, f64)> {
    let Some((a, b)) = text.split_once(':') else {
        return invalid(format!("interval {text:?} is not a:b"));
    };
    let a: f64 = a
        .trim()
        .parse()
        .or_else(|_| invalid(format!("bad interval start {a:?}")))?;
    let b: f64 = b
        .trim()
        .parse()
        .or_else(|_| invalid(format!("bad interval end {b:?}")))?;
    Ok((a, b))
}

fn tiling_measure(cfg: &ExperimentConfig, text: &str, interval: &str) -> Result<CommandResult> {
    let sys = system(cfg)?;
    let lens = lengths(cfg)?;
    let u = word(&sys.alphabet(), text)?;
    let (a, b) = parse_interval(interval)?;
    let cyl = FlowCylinder::new(u, a, b, &lens)?;
    let nu = measure_of(&sys, &lens, &cyl)?;
    let mass: f64 = (0..2)
        .map(|l| measure_of(&sys, &lens, &FlowCylinder::letter(l, &lens)))
        .sum::<Result<f64>>()?;
    let span = cfg.window as f64;
    let p = flow_point(&sys, &mut rng(cfg), &lens, span)?;
    let emp = birkhoff_flow(&p, &cyl, span)?;
    let k = cfg.tol("stderr");
    let checks = vec![
        Check::new(
            "tiling.total_mass",
            (mass - 1.0).abs() <= 1e-12,
            format!("{mass}"),
        ),
        Check::new(
            "tiling.empirical_measure",
            emp.within(nu, k) || (emp.value - nu).abs() <= cfg.tol("freq"),
            format!("empirical {} ± {}", emp.value, emp.stderr_proxy),
        ),
    ];
    let mut t = Table::new(&["word", "a", "b", "measure", "empirical", "stderr"]);
    t.push(vec![
        text.into(),
        a.to_string(),
        b.to_string(),
        nu.to_string(),
        emp.value.to_string(),
        emp.stderr_proxy.to_string(),
    ]);
    result(
        checks,
        json!({"word": text, "interval": [a, b], "measure": nu, "tile_lengths": lens, "empirical": emp, "total_letter_mass": mass}),
        t,
    )
}

fn orbit(cfg: &ExperimentConfig, t_max: f64, step: f64) -> Result<CommandResult> {
    if !(t_max >= 0.0 && step > 0.0 && t_max.is_finite()) {
        return invalid("need t_max ≥ 0 and step > 0");
    }
    let sys = system(cfg)?;
    let lens = lengths(cfg)?;
    let p = flow_point(&sys, &mut rng(cfg), &lens, t_max + 2.0)?;
    let alphabet = sys.alphabet();
    let mut t = Table::new(&["t", "letter", "offset", "tile", "p", "q"]);
    let mut rows = Vec::new();
    let steps = (t_max / step).floor() as usize;
    let mut walked = p.clone();
    let mut group_ok = true;
    for i in 0..=steps {
        let time = i as f64 * step;
        let q = p.flow(time)?;
        if i > 0 {
            walked = walked.flow(step)?;
            group_ok &= walked.tile() == q.tile()
                && walked.coords() == q.coords()
                && (walked.offset() - q.offset()).abs() <= 1e-9;
        }
        let letter = alphabet.render(&[q.letter()]);
        t.push(vec![
            time.to_string(),
            letter.clone(),
            q.offset().to_string(),
            q.tile().to_string(),
            q.coords().p.to_string(),
            q.coords().q.to_string(),
        ]);
        rows.push(json!({"t": time, "letter": letter, "offset": q.offset(), "tile": q.tile(), "coords": q.coords()}));
    }
    let checks = vec![Check::new(
        "tiling.group_law",
        group_ok,
        "stepwise flow matches direct flow",
    )];
    result(checks, json!({"tile_lengths": lens, "samples": rows}), t)
}

fn freq(cfg: &ExperimentConfig, texts: &[String]) -> Result<CommandResult> {
    let sys = system(cfg)?;
    let alphabet = sys.alphabet();
    let words: Vec<Word> = if texts.is_empty() {
        let mut w = admissible_words(&sys, 1)?;
        w.extend(admissible_words(&sys, 2)?);
        w
    } else {
        texts
            .iter()
            .map(|t| word(&alphabet, t))
            .collect::<Result<_>>()?
    };
    let mut r = rng(cfg);
    let x = sys.random_window(&mut r, 0, cfg.window as usize)?;
    let y = sys.random_window(&mut r, 1, cfg.window as usize)?;
    let k = cfg.tol("stderr");
    let tol = cfg.tol("freq");
    let mut checks = Vec::new();
    let mut t = Table::new(&["word", "empirical", "stderr", "exact", "second_window"]);
    let mut out = Vec::new();
    for w in &words {
        let e = birkhoff(&x, w)?;
        let e2 = birkhoff(&y, w)?;
        let exact = exact_frequency(&sys, w)?;
        let label = alphabet.render(w);
        checks.push(Check::new(
            &format!("lab.frequency[{label}]"),
            e.within(exact, k) || (e.value - exact).abs() <= tol,
            format!("empirical {} exact {exact}", e.value),
        ));
        t.push(vec![
            label.clone(),
            e.value.to_string(),
            e.stderr_proxy.to_string(),
            exact.to_string(),
            e2.value.to_string(),
        ]);
        out.push(json!({"word": label, "estimate": e, "second_window": e2, "exact": exact}));
    }
    let letters = admissible_words(&sys, 1)?;
    for w in words.iter().filter(|w| x.len() > w.len() + 1) {
        let total: f64 = letters
            .iter()
            .map(|a| birkhoff(&x, &w.concat(a)).map(|e| e.value))
            .sum::<Result<f64>>()?;
        let base = birkhoff(&x, w)?.value;
        let ok = (base - total).abs() <= 2.0 / cfg.window as f64;
        checks.push(Check::new(
            &format!("lab.indicator_algebra[{}]", alphabet.render(w)),
            ok,
            format!("{base} vs {total}"),
        ));
    }
    result(checks, json!({"frequencies": out}), t)
}

fn correlate(cfg: &ExperimentConfig, text: Option<&str>, shifts: &[i64]) -> Result<CommandResult> {
    let sys = system(cfg)?;
    let alphabet = sys.alphabet();
    let u = match text {
        Some(t) => word(&alphabet, t)?,
        None => default_block(&sys)?,
    };
    let shifts: Vec<i64> = if shifts.is_empty() {
        default_shift_times(&sys)?
            .into_iter()
            .map(|s| s as i64)
            .collect()
    } else {
        shifts.to_vec()
    };
    let x = sys.random_window(&mut rng(cfg), 0, cfg.window as usize)?;
    let mu = birkhoff(&x, &u)?;
    let c = correlation_sequence(&x, &u, &shifts)?;
    let mut t = Table::new(&["shift", "correlation", "stderr", "mu_squared"]);
    for (k, e) in shifts.iter().zip(&c) {
        t.push(vec![
            k.to_string(),
            e.value.to_string(),
            e.stderr_proxy.to_string(),
            (mu.value * mu.value).to_string(),
        ]);
    }
    let mut checks = Vec::new();
    if let Some(i) = shifts.iter().position(|&k| k == 0) {
        checks.push(Check::new(
            "lab.correlation_at_zero",
            (c[i].value - mu.value).abs() <= 1.0 / cfg.window as f64 * u.len() as f64,
            format!("{} vs {}", c[i].value, mu.value),
        ));
    }
    result(
        checks,
        json!({"word": alphabet.render(&u), "measure": mu, "shifts": shifts, "correlations": c}),
        t,
    )
}

fn spectrum(
    cfg: &ExperimentConfig,
    text: &str,
    flow: bool,
    max_q: Option<u32>,
) -> Result<CommandResult> {
    let sys = system(cfg)?;
    let alphabet = sys.alphabet();
    let u = word(&alphabet, text)?;
    let lens = lengths(cfg)?;
    let mut r = rng(cfg);
    let (scan, zero_value) = if flow {
        let grid = match max_q {
            Some(q) => rational_grid(q),
            None => default_lambda_grid(Some(lens.of(1))),
        };
        let span = cfg.window as f64;
        let p = flow_point(&sys, &mut r, &lens, span)?;
        let cyl = FlowCylinder::new(u.clone(), 0.0, lens.of(u[0]), &lens)?;
        let scan = spectral_scan_flow(&p, &cyl, span, &grid)?;
        (scan, birkhoff_flow(&p, &cyl, span)?.value)
    } else {
        let grid = match max_q {
            Some(q) => rational_grid(q),
            None => default_lambda_grid(None),
        };
        let x = sys.random_window(&mut r, 0, cfg.window as usize)?;
        (spectral_scan(&x, &u, &grid)?, birkhoff(&x, &u)?.value)
    };
    let mut checks = Vec::new();
    if let Some(m0) = scan.at(0.0) {
        let ok = if flow {
            (m0 - zero_value).abs() <= 1e-12
        } else {
            m0 == zero_value
        };
        checks.push(Check::new(
            "lab.spectral_zero_is_birkhoff",
            ok,
            format!("{m0} vs {zero_value}"),
        ));
    }
    let mut t = Table::new(&["lambda", "modulus"]);
    for (l, m) in scan.lambdas.iter().zip(&scan.moduli) {
        t.push(vec![l.to_string(), m.to_string()]);
    }
    let peak = scan.max_away_from_zero(1e-12);
    result(
        checks,
        json!({"word": text, "flow": flow, "scan": scan, "max_nonzero": peak}),
        t,
    )
}

fn rigidity(
    cfg: &ExperimentConfig,
    text: Option<&str>,
    times: &[f64],
    flow: bool,
) -> Result<CommandResult> {
    let sys = system(cfg)?;
    let alphabet = sys.alphabet();
    let u = match text {
        Some(t) => word(&alphabet, t)?,
        None => default_block(&sys)?,
    };
    let mut r = rng(cfg);
    let window = cfg.window as usize;
    let res = if flow {
        let lens = lengths(cfg)?;
        let times: Vec<f64> = if times.is_empty() {
            let b = DjrBlocks::new();
            (3..=6)
                .map(|n| {
                    let c = letter_counts(b.word(n).unwrap(), 2);
                    c[0] as f64 * lens.of(0) + c[1] as f64 * lens.of(1)
                })
                .filter(|&t| t + 1000.0 < cfg.window as f64 / 2.0)
                .collect()
        } else {
            times.to_vec()
        };
        let reach = times.iter().cloned().fold(0.0, f64::max);
        let horizon = cfg.window as f64 - reach;
        if horizon < 1000.0 {
            return Err(Error::Inconclusive(format!(
                "window {} leaves no room for time {reach}",
                cfg.window
            )));
        }
        let p = flow_point(&sys, &mut r, &lens, cfg.window as f64)?;
        let cyl = FlowCylinder::new(u.clone(), 0.0, lens.of(u[0]), &lens)?;
        flow_rigidity_test(&p, &cyl, &times, horizon)?
    } else {
        let ts: Vec<u64> = if times.is_empty() {
            default_shift_times(&sys)?
                .into_iter()
                .filter(|&t| (t as usize) + 1000 < window)
                .collect()
        } else {
            times
                .iter()
                .map(|&t| {
                    if t >= 0.0 && t.fract() == 0.0 {
                        Ok(t as u64)
                    } else {
                        invalid(format!("shift time {t} is not a nonnegative integer"))
                    }
                })
                .collect::<Result<_>>()?
        };
        let x = sys.random_window(&mut r, 0, window)?;
        rigidity_test(&x, &u, &ts)?
    };
    let mut checks = Vec::new();
    for (t, ratio) in res.times.iter().zip(&res.ratios) {
        if *t == 0.0 {
            checks.push(Check::new(
                "lab.rigidity_at_zero",
                (*ratio - 1.0).abs() <= 1e-12,
                ratio.to_string(),
            ));
        }
    }
    let mut t = Table::new(&["time", "ratio"]);
    for (time, ratio) in res.times.iter().zip(&res.ratios) {
        t.push(vec![time.to_string(), ratio.to_string()]);
    }
    result(
        checks,
        json!({"word": alphabet.render(&u), "flow": flow, "result": res}),
        t,
    )
}

fn joining(cfg: &ExperimentConfig, length: usize, shift: Option<i64>) -> Result<CommandResult> {
    if length == 0 || length > 6 {
        return invalid("cylinder length must be in 1..=6");
    }
    let sys = system(cfg)?;
    let words = admissible_words(&sys, length)?;
    let mut r = rng(cfg);
    let window = cfg.window as usize + length + shift.map_or(0, |k| k.unsigned_abs() as usize);
    let x = sys.random_window(&mut r, 0, window)?;
    let y = match shift {
        Some(k) => x.shifted(k)?,
        None => sys.random_window(&mut r, 1, window)?,
    };
    let horizon = shift.map(|k| k.abs().max(50)).unwrap_or(50);
    let tol = match cfg.tol("joining") {
        v if v > 0.0 => Some(v),
        _ => None,
    };
    let j = joining_estimate(&x, &y, &words, &words, tol, horizon)?;
    let mut checks = vec![Check::new(
        "lab.joining_marginals",
        j.marginal_deviation <= cfg.tol("marginal"),
        format!("{}", j.marginal_deviation),
    )];
    if let Some(k) = shift {
        checks.push(Check::new(
            "lab.joining_off_diagonal",
            j.classification == JoiningClass::OffDiagonal(k),
            format!("{:?}", j.classification),
        ));
    }
    let mut t = Table::new(&["p", "q", "frequency", "product"]);
    for pf in &j.pair_frequencies {
        t.push(vec![
            pf.p.clone(),
            pf.q.clone(),
            pf.frequency.to_string(),
            pf.product.to_string(),
        ]);
    }
    result(checks, json!({"joining": j}), t)
}

fn djr_wm(cfg: &ExperimentConfig) -> Result<CommandResult> {
    let lens = lengths(cfg)?;
    let rep = djr_weak_mixing_experiment(&lens, cfg.depth)?;
    let target = cfg.tol("djr") * rep.d;
    let mut checks = Vec::new();
    let mut t = Table::new(&["n", "nu_e", "nu_f", "target"]);
    for l in &rep.levels {
        checks.push(Check::new(
            &format!("lab.djr_nu_e[{}]", l.n),
            l.nu_e >= target,
            l.nu_e.to_string(),
        ));
        checks.push(Check::new(
            &format!("lab.djr_nu_f[{}]", l.n),
            l.nu_f >= target,
            l.nu_f.to_string(),
        ));
        checks.push(Check::new(
            &format!("lab.djr_disjoint[{}]", l.n),
            l.e_disjoint && l.f_disjoint,
            "",
        ));
        checks.push(Check::new(
            &format!("lab.djr_inserted_one[{}]", l.n),
            l.insert_ok && l.insert_displacement == BoundaryCoords::new(0, 1),
            format!("{:?}", l.insert_displacement),
        ));
        checks.push(Check::new(
            &format!("lab.djr_pure_shift[{}]", l.n),
            l.pure_ok && l.flow_landing_ok,
            "",
        ));
        t.push(vec![
            l.n.to_string(),
            l.nu_e.to_string(),
            l.nu_f.to_string(),
            target.to_string(),
        ]);
    }
    result(checks, json!({"report": rep}), t)
}

fn verify_all(cfg: &ExperimentConfig) -> Result<CommandResult> {
    let sys = system(cfg)?;
    let fam = family(&sys);
    let lens = lengths(cfg)?;
    let mut r = rng(cfg);
    let window = cfg.window as usize;
    let k = cfg.tol("stderr");
    let mut checks = Vec::new();
    let mut payload = serde_json::Map::new();

    if let Some(f) = &fam {
        let h = build_hierarchy(f.clone(), cfg.depth)?;
        for c in identity_checks(&h)? {
            checks.push(Check::new(
                &format!("hierarchy.{}", c.name),
                c.passed,
                c.detail,
            ));
        }
    }

    if let Some(sub) = sys.substitution_ref() {
        checks.push(Check::new("substitution.primitive", sub.is_primitive(), ""));
        let pf = sub.pf_frequencies()?;
        checks.push(Check::new(
            "substitution.pf_residual",
            pf.residual <= 1e-12,
            pf.residual.to_string(),
        ));
        let x = sys.random_window(&mut r, 0, window)?;
        for a in 0..sub.size() as u8 {
            let e = birkhoff(&x, &[a])?;
            let exact = pf.frequencies[a as usize];
            checks.push(Check::new(
                &format!("lab.letter_frequency[{a}]"),
                e.within(exact, k) || (e.value - exact).abs() <= cfg.tol("freq"),
                format!("{} vs {exact}", e.value),
            ));
        }
        let y = sys.random_window(&mut r, 1, window)?;
        for w in admissible_words(&sys, 2)? {
            let e1 = birkhoff(&x, &w)?;
            let e2 = birkhoff(&y, &w)?;
            checks.push(Check::new(
                &format!("lab.seed_independence[{}]", sys.alphabet().render(&w)),
                e1.agrees(&e2, k) || (e1.value - e2.value).abs() <= cfg.tol("freq"),
                format!("{} vs {}", e1.value, e2.value),
            ));
        }
        let grid = rational_grid(8);
        let u = [0u8];
        if window >= subdyn::lab::spectral::MIN_SCAN_WINDOW {
            let s = spectral_scan(&x, &u, &grid)?;
            checks.push(Check::new(
                "lab.spectral_zero_is_birkhoff",
                s.at(0.0) == Some(birkhoff(&x, &u)?.value),
                "",
            ));
        }
        let c = correlation_sequence(&x, &u, &[0])?;
        checks.push(Check::new(
            "lab.correlation_at_zero",
            (c[0].value - birkhoff(&x, &u)?.value).abs() <= 1.0 / window as f64,
            "",
        ));
        {
            let words = admissible_words(&sys, 2)?;
            let z = sys.random_window(
                &mut r,
                0,
                window.max(subdyn::lab::joining::MIN_JOINING_WINDOW + 64),
            )?;
            let j = joining_estimate(&z, &z.shifted(3)?, &words, &words, None, 50)?;
            checks.push(Check::new(
                "lab.joining_off_diagonal",
                j.classification == JoiningClass::OffDiagonal(3),
                format!("{:?}", j.classification),
            ));
            checks.push(Check::new(
                "lab.joining_marginals",
                j.marginals_ok,
                j.marginal_deviation.to_string(),
            ));
        }
    }

    if let Some(f @ (Family::Theta | Family::Eta)) = &fam {
        let rec = Recognizer::new(f)?;
        let sub = rec.substitution().clone();
        let mut roundtrip = true;
        for len in 1..=10 {
            for w in sub.language().words_of_length(len) {
                roundtrip &= rec.preimages(&sub.expand(&w, 1)?) == vec![w];
            }
        }
        checks.push(Check::new(
            "recognizer.roundtrip",
            roundtrip,
            "admissible words up to length 10",
        ));
        let m = rec.threshold();
        let unique = sub
            .language()
            .words_of_length(m)
            .iter()
            .all(|w| rec.parse(w).map(|p| p.unique).unwrap_or(false));
        checks.push(Check::new(
            "recognizer.unique_at_threshold",
            unique,
            format!("length {m}"),
        ));
        let ws = WitnessSearch::new(f)?;
        let s = ws.sample(&mut r, 3, 16)?;
        checks.push(Check::new(
            "recognizer.witness_bounds",
            s.witness.bounds_ok,
            format!("{:?}", s.witness.case),
        ));
        payload.insert("witness".into(), json!(s.witness));
    }

    if sys.alphabet().size() == 2 {
        let span = (window as f64).min(2e5);
        let p = flow_point(&sys, &mut r, &lens, span + 10.0)?;
        let mut group = true;
        for _ in 0..200 {
            let s = r.gen_range(-50.0..span / 2.0);
            let t = r.gen_range(-50.0..span / 2.0);
            let a = p.flow(s)?.flow(t)?;
            let b = p.flow(s + t)?;
            group &= a.tile() == b.tile()
                && a.coords() == b.coords()
                && (a.offset() - b.offset()).abs() <= cfg.tol("offset").max(1e-9);
        }
        checks.push(Check::new("tiling.group_law", group, "200 random pairs"));
        let mut mass = 0.0;
        for cyl in whole_space(&lens) {
            let nu = measure_of(&sys, &lens, &cyl)?;
            mass += nu;
            let e = birkhoff_flow(&p, &cyl, span)?;
            checks.push(Check::new(
                &format!("tiling.flow_vs_formula[{}]", cyl.word[0]),
                e.within(nu, k) || (e.value - nu).abs() <= cfg.tol("freq"),
                format!("{} vs {nu}", e.value),
            ));
        }
        checks.push(Check::new(
            "tiling.total_mass",
            (mass - 1.0).abs() <= 1e-12,
            mass.to_string(),
        ));
    }

    if fam == Some(Family::Djr) {
        let rep = djr_ratio_limit(cfg.depth.max(4), [1.0, lens.of(1)])?;
        checks.push(Check::new(
            "hierarchy.djr_ratio_monotone",
            rep.monotone && rep.bounded_by_one,
            "",
        ));
        checks.push(Check::new(
            "hierarchy.djr_tile_differences_shrink",
            rep.differences_shrinking,
            "",
        ));
        let wm = djr_weak_mixing_experiment(&lens, cfg.depth.clamp(3, 5))?;
        checks.push(Check::new(
            "lab.djr_weak_mixing",
            wm.all_ok,
            format!("d = {}", wm.d),
        ));
        let x = sys.random_window(&mut r, 0, window)?;
        let marks = occurrence_marks(&x, &default_block(&sys)?)?;
        let blocks = DjrBlocks::new();
        let times: Vec<u64> = (3..=6)
            .map(|n| blocks.length(n) as u64)
            .filter(|&t| (t as usize) + 1000 < marks.len())
            .collect();
        let rig = rigidity_test(&x, &default_block(&sys)?, &times)?;
        let increasing = rig.ratios.windows(2).all(|w| w[1] >= w[0] - 1e-3);
        checks.push(Check::new(
            "lab.djr_rigidity_increasing",
            increasing,
            format!("{:?}", rig.ratios),
        ));
    }

    result(
        checks,
        Value::Object(payload),
        Table::new(&["check", "passed"]),
    )
    .map(|mut c| {
        let rows: Vec<Vec<String>> = c
            .checks
            .iter()
            .map(|ch| vec![ch.name.clone(), ch.passed.to_string()])
            .collect();
        c.table.rows = rows;
        c
    })
}

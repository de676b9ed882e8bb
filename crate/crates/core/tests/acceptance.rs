//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances and time limits are the constants below.

use std::time::{Duration, Instant};

use m4kit::abelianize::h1;
use m4kit::certify::{candidate, replay, todd_coxeter, Budget, Certificate, Verdict};
use m4kit::geography::{realize_pair, region_check, FreedmanModel, GeoPoint};
use m4kit::manifest::{replay_report, run_text, Report, RunOptions, Status};
use m4kit::presentation::FpPresentation;
use m4kit::word::{Generator, Letter, Word};
use num_bigint::BigInt;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

/// Integer invariants must match exactly.
const EXACT: i64 = 0;
const PER_RUN_LIMIT: Duration = Duration::from_secs(10);
const XN_SWEEP_LIMIT: Duration = Duration::from_secs(120);
const RANDOM_CORPUS: usize = 250;
const RANDOM_SEED: u64 = 0x006d_346b_6974;
const MAX_GENERATORS: usize = 4;
const MAX_ENTRY: i64 = 9;

struct Suite {
    failures: Vec<u32>,
    /// Every certificate emitted along the way, for the replay criterion.
    certificates: Vec<(String, Certificate)>,
    reports: Vec<Report>,
    /// `(label, e, sigma, simply connected, point)` for the geography criterion.
    outputs: Vec<(String, i64, i64, bool, GeoPoint)>,
}

impl Suite {
    fn record(&mut self, n: u32, title: &str, problems: &[String], summary: String) {
        let ok = problems.is_empty();
        println!("criterion {n:>2} [{}] {title}: {summary}", if ok { "PASS" } else { "FAIL" });
        for p in problems {
            println!("             - {p}");
        }
        if !ok {
            self.failures.push(n);
        }
    }

    /// Runs a manifest in certify mode and records its certificates.
    fn run(&mut self, label: &str, text: &str, options: &RunOptions) -> (Report, Duration) {
        let t = Instant::now();
        let report = run_text(text, options).unwrap_or_else(|e| panic!("{label}: {e}"));
        let elapsed = t.elapsed();
        for e in &report.entries {
            if let Some(c) = &e.certificate {
                self.certificates.push((format!("{label}/{}", e.name), c.clone()));
            }
        }
        self.reports.push(report.clone());
        (report, elapsed)
    }
}

fn zpp(q: u64, r: u64, m: u64, signs: (i8, i8)) -> String {
    format!("Zpp(q={q}, r={r}, m={m}, e1={}, e3={})", signs.0, signs.1)
}

fn x1_text(m: u64, signs: (i8, i8)) -> String {
    format!(
        "block Y = Y1(p=1, q=1)\nblock Z = {}\nsum X = fibersum(Y.Sigma2, Z.SigmaBar2, map=standard)\nexpect X: e=5 sigma=-1 pi1=trivial model=CP2#2CP2bar\n",
        zpp(1, 1, m, signs)
    )
}

fn xn_text(n: u32, m: u64, signs: (i8, i8)) -> String {
    let model = FreedmanModel { m: 2 * n as u64 - 1, n: 2 * n as u64 };
    format!(
        "block Y = Yn(n={n}, m={m})\nblock Z = {}\nsum X = fibersum(Y.Sigma2, Z.SigmaBar2, map=standard)\nexpect X: e={} sigma=-1 pi1=trivial model={model}\n",
        zpp(1, 0, 1, signs),
        4 * n + 1
    )
}

fn v_text(m: u64, signs: (i8, i8)) -> String {
    format!(
        "block M = Mqr(q=1, r=1)\nblock Z = {}\nsum X = fibersum(M.SigmaHat2, Z.SigmaBar2, map=standard)\nexpect X: e=7 sigma=-3 pi1=trivial model=CP2#4CP2bar\n",
        zpp(1, 1, m, signs)
    )
}

fn w_text(m: u64, signs: (i8, i8)) -> String {
    format!(
        "block T = T2xS2_4blowups()\nblock Z = {}\nsum X = fibersum(T.SigmaTilde2, Z.SigmaBar2, map=standard)\nexpect X: e=9 sigma=-5 pi1=trivial model=CP2#6CP2bar\n",
        zpp(1, 1, m, signs)
    )
}

/// Checks a simply connected family member: exact invariants, Trivial
/// verdict and the expected model.
fn check_trivial(report: &Report, label: &str, e: i64, sigma: i64, model: FreedmanModel, problems: &mut Vec<String>) {
    let x = report.entry("X").expect("entry X");
    if (x.manifold.e - e).abs() > EXACT || (x.manifold.sigma - sigma).abs() > EXACT {
        problems.push(format!("{label}: (e, sigma) = ({}, {}), want ({e}, {sigma})", x.manifold.e, x.manifold.sigma));
    }
    match x.certificate.as_ref().map(|c| &c.verdict) {
        Some(Verdict::Trivial) => {}
        other => problems.push(format!("{label}: verdict {other:?}")),
    }
    if x.model != Some(model) {
        problems.push(format!("{label}: model {:?}, want {model}", x.model));
    }
    if report.status != Status::Pass {
        problems.push(format!("{label}: manifest status {:?}", report.status));
    }
}

fn note_output(suite: &mut Suite, label: String, report: &Report, name: &str) {
    let x = report.entry(name).expect("entry");
    let sc = matches!(x.certificate.as_ref().map(|c| &c.verdict), Some(Verdict::Trivial));
    let p = x.coords.expect("admissible (e, sigma)");
    suite.outputs.push((label, x.manifold.e, x.manifold.sigma, sc, p));
}

fn criterion_1(s: &mut Suite, opts: &RunOptions) {
    let mut problems = Vec::new();
    let mut slowest = Duration::ZERO;
    for m in 1..=5 {
        let label = format!("X1({m})");
        let (r, t) = s.run(&label, &x1_text(m, (1, -1)), opts);
        check_trivial(&r, &label, 5, -1, FreedmanModel { m: 1, n: 2 }, &mut problems);
        if t > PER_RUN_LIMIT {
            problems.push(format!("{label} took {t:?}"));
        }
        slowest = slowest.max(t);
        note_output(s, label, &r, "X");
    }
    s.record(1, "X1(m), m=1..5: e=5 sigma=-1 trivial CP2#2CP2bar", &problems, format!("slowest run {slowest:.2?}"));
}

fn criterion_2(s: &mut Suite, opts: &RunOptions) {
    let mut problems = Vec::new();
    let t0 = Instant::now();
    for n in 2..=10u32 {
        for m in 1..=3 {
            let label = format!("X{n}({m})");
            let (r, _) = s.run(&label, &xn_text(n, m, (1, -1)), opts);
            let model = FreedmanModel { m: 2 * n as u64 - 1, n: 2 * n as u64 };
            check_trivial(&r, &label, 4 * n as i64 + 1, -1, model, &mut problems);
            note_output(s, label, &r, "X");
        }
    }
    let total = t0.elapsed();
    if total > XN_SWEEP_LIMIT {
        problems.push(format!("sweep took {total:?}"));
    }
    s.record(2, "Xn(m), n=2..10, m=1..3: e=4n+1 sigma=-1 trivial", &problems, format!("27 manifolds in {total:.2?}"));
}

fn criterion_3(s: &mut Suite, opts: &RunOptions) {
    let mut problems = Vec::new();
    for m in 1..=3 {
        let label = format!("V({m})");
        let (r, _) = s.run(&label, &v_text(m, (1, -1)), opts);
        check_trivial(&r, &label, 7, -3, FreedmanModel { m: 1, n: 4 }, &mut problems);
        note_output(s, label, &r, "X");
        let label = format!("W({m})");
        let (r, _) = s.run(&label, &w_text(m, (1, -1)), opts);
        check_trivial(&r, &label, 9, -5, FreedmanModel { m: 1, n: 6 }, &mut problems);
        note_output(s, label, &r, "X");
    }
    s.record(3, "V(m) -> CP2#4CP2bar, W(m) -> CP2#6CP2bar, m=1..3", &problems, "6 manifolds".into());
}

fn criterion_4(s: &mut Suite, opts: &RunOptions) {
    let mut problems = Vec::new();
    let c = Word::var("c");
    let mut slowest = Duration::ZERO;
    for p in [0u64, 2, 3, 4, 5, 6] {
        let label = format!("X1~({p},1)");
        let target = if p == 0 { "Z".to_string() } else { format!("Z/{p}") };
        let text = format!(
            "block Y = Y1(p={p}, q=1)\nblock Z = Zpp(q=1, r=1, m=1)\nsum X = fibersum(Y.Sigma2, Z.SigmaBar2, map=standard)\nexpect X: pi1={target} generator=c\n"
        );
        let t = Instant::now();
        let (r, _) = s.run(&label, &text, opts);
        let x = r.entry("X").unwrap();
        let verdict = x.certificate.as_ref().map(|c| c.verdict.clone());
        let want = if p == 0 {
            Verdict::InfiniteCyclic { generator: c.clone() }
        } else {
            Verdict::FiniteCyclic { order: p, generator: c.clone() }
        };
        if verdict.as_ref() != Some(&want) {
            problems.push(format!("{label}: verdict {verdict:?}"));
        }
        // independent of the derivation: index of <c> and the abelianization
        let cand = candidate(&x.manifold.pi1);
        match todd_coxeter(&cand, std::slice::from_ref(&c), &opts.budget) {
            Ok(e) if e.index == 1 => {}
            other => problems.push(format!("{label}: index of <c> is {other:?}")),
        }
        let ab = h1(&cand);
        let ab_ok = if p == 0 { ab.is_infinite_cyclic() } else { ab.finite_cyclic_order() == Some(BigInt::from(p)) };
        if !ab_ok {
            problems.push(format!("{label}: H1 = {ab}"));
        }
        let took = t.elapsed();
        if took > PER_RUN_LIMIT {
            problems.push(format!("{label} took {took:?}"));
        }
        slowest = slowest.max(took);
        if r.status != Status::Pass {
            problems.push(format!("{label}: manifest status {:?}", r.status));
        }
        note_output(s, label, &r, "X");
    }
    s.record(4, "X1~(p,1): Z for p=0, Z/p for p=2..6, generated by c", &problems, format!("slowest case {slowest:.2?}"));
}

fn criterion_5(s: &mut Suite, opts: &RunOptions) {
    let mut problems = Vec::new();
    let text = "block Y = Yn(n=2, m=1)\nblock B = Zpp(q=0, r=0, m=1)\nsum X = fibersum(Y.Sigma2, B.SigmaBar2, map=standard)\nexpect X: pi1=Z/2\n";
    let (r, _) = s.run("Z2-sum", text, opts);
    let x = r.entry("X").unwrap();
    let verdict = x.certificate.as_ref().map(|c| c.verdict.clone());
    let derived = matches!(verdict, Some(Verdict::FiniteCyclic { order: 2, .. }));
    let cand = candidate(&x.manifold.pi1);
    let ab = h1(&cand);
    let index = todd_coxeter(&cand, &[Word::var("alpha3")], &opts.budget).map(|e| e.index);
    let fallback = ab.finite_cyclic_order() == Some(BigInt::from(2)) && index == Ok(1);
    if !derived && !fallback {
        problems.push(format!("verdict {verdict:?}; H1 = {ab}; index of <alpha3> = {index:?}"));
    }
    note_output(s, "Z2-sum".into(), &r, "X");
    let how = if derived { "derived Z/2" } else { "fallback checks" };
    s.record(5, "Yn(2,1) # (T4 # CP2bar) has pi1 = Z/2", &problems, format!("{how}; H1 = {ab}, [G:<alpha3>] = {index:?}"));
}

fn criterion_6(s: &mut Suite, opts: &RunOptions) {
    let mut problems = Vec::new();
    // the genus 2 sums with T4 # 2 CP2bar land on the chi = 2 points
    let extra = "block T = T4Blown2()\nblock Z = Zpp(q=1, r=1, m=1)\n\
        block Y = Y1(p=1, q=1)\nsum X = fibersum(Y.Sigma2, Z.SigmaBar2, map=standard)\nsum A = fibersum(X.Sigma2, T.SigmaHat2, map=standard)\nexpect A: pi1=trivial\n\
        block M = Mqr(q=1, r=1)\nsum V = fibersum(M.SigmaHat2, Z.SigmaBar2, map=standard)\nsum B = fibersum(V.SigmaHat2, T.SigmaHat2, map=standard)\nexpect B: pi1=trivial\n\
        block S = T2xS2_4blowups()\nsum W = fibersum(S.SigmaTilde2, Z.SigmaBar2, map=standard)\nsum C = fibersum(W.SigmaTilde2, T.SigmaHat2, map=standard)\nexpect C: pi1=trivial\n";
    let (r, _) = s.run("chi2-sums", extra, opts);
    for n in ["A", "B", "C"] {
        note_output(s, format!("chi2-sum {n}"), &r, n);
    }
    let expected_point = |label: &str| -> Option<GeoPoint> {
        if label.starts_with("X1(") || label.starts_with("X1~(") {
            Some(GeoPoint::new(1, 7))
        } else if let Some(rest) = label.strip_prefix('X') {
            let n: i64 = rest.split('(').next()?.parse().ok()?;
            Some(GeoPoint::new(n, 8 * n - 1))
        } else if label.starts_with("V(") {
            Some(GeoPoint::new(1, 5))
        } else if label.starts_with("W(") {
            Some(GeoPoint::new(1, 3))
        } else if label == "Z2-sum" {
            Some(GeoPoint::new(2, 15))
        } else {
            match label {
                "chi2-sum A" => Some(GeoPoint::new(2, 13)),
                "chi2-sum B" => Some(GeoPoint::new(2, 11)),
                "chi2-sum C" => Some(GeoPoint::new(2, 9)),
                _ => None,
            }
        }
    };
    let mut simply_connected = 0;
    for (label, e, sigma, sc, p) in &s.outputs {
        if p.c1sq - 8 * p.chi_h != *sigma {
            problems.push(format!("{label}: c1^2 - 8 chi_h = {} but sigma = {sigma}", p.c1sq - 8 * p.chi_h));
        }
        if (p.chi_h * 4 - (e + sigma)).abs() > EXACT || (p.c1sq - (2 * e + 3 * sigma)).abs() > EXACT {
            problems.push(format!("{label}: coordinates {p} disagree with (e, sigma) = ({e}, {sigma})"));
        }
        if *sc {
            simply_connected += 1;
            if !region_check(*p) {
                problems.push(format!("{label}: {p} outside the region"));
            }
        }
        if expected_point(label) != Some(*p) {
            problems.push(format!("{label}: point {p}, expected {:?}", expected_point(label)));
        }
    }
    let listed: Vec<GeoPoint> =
        [(1, 7), (2, 15), (3, 23), (1, 5), (2, 13), (2, 11), (2, 9)].iter().map(|&(a, b)| GeoPoint::new(a, b)).collect();
    for want in &listed {
        if !s.outputs.iter().any(|(_, _, _, sc, p)| *sc && p == want) {
            problems.push(format!("no simply connected output at {want}"));
        }
    }
    s.record(
        6,
        "c1^2 - 8 chi_h = sigma; simply connected outputs inside the region",
        &problems,
        format!("{} manifolds, {simply_connected} simply connected", s.outputs.len()),
    );
}

fn criterion_7(s: &mut Suite, opts: &RunOptions) {
    let mut problems = Vec::new();
    let rows = [(1, 7), (2, 15), (3, 23), (1, 5), (2, 13), (2, 11), (2, 9)];
    let mut summary = Vec::new();
    for (chi, c) in rows {
        let p = GeoPoint::new(chi, c);
        let r = match realize_pair(p, &opts.budget) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("{p}: {e}"));
                continue;
            }
        };
        s.certificates.push((format!("realize{p}"), r.pi1.clone()));
        s.certificates.push((format!("realize{p}/meridian"), r.meridian.certificate.clone()));
        let cyclic_z = matches!(r.pi1.verdict, Verdict::InfiniteCyclic { .. });
        let must_surject = [(1, 7), (2, 15), (3, 23)].contains(&(chi, c));
        if !r.surjectivity.holds() && must_surject {
            problems.push(format!("{p}: surjectivity index {:?}", r.surjectivity.index));
        }
        if (chi, c) == (1, 7) {
            if r.pi1.verdict != (Verdict::InfiniteCyclic { generator: Word::var("c") }) {
                problems.push(format!("{p}: verdict {}", r.pi1.verdict));
            }
            let want = Word::commutator(&Word::var("d").inverse(), &Word::var("b2").inverse());
            if r.recipe.meridian() != &want {
                problems.push(format!("{p}: meridian {} is not {want}", r.recipe.meridian()));
            }
            if !r.meridian_trivial() {
                problems.push(format!("{p}: meridian not proved trivial"));
            }
        } else if !cyclic_z && r.recipe.detailed {
            problems.push(format!("{p}: verdict {}", r.pi1.verdict));
        }
        summary.push(format!(
            "{p} {} surj={} mer={}",
            if cyclic_z { "Z" } else { "inconclusive" },
            r.surjectivity.holds(),
            r.meridian_trivial()
        ));
    }
    s.record(7, "realizations of the six geography rows", &problems, summary.join("; "));
}

/// A random finite abelian group: all commutators plus one row per relator
/// with entries in `[-MAX_ENTRY, MAX_ENTRY]`, letters in shuffled order.
fn random_abelian(rng: &mut StdRng) -> Option<FpPresentation> {
    let k = rng.random_range(1..=MAX_GENERATORS);
    let gens: Vec<Generator> = (0..k).map(|i| Generator::new(&format!("x{i}")).unwrap()).collect();
    let mut rels = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            rels.push(Word::commutator(&Word::gen(&gens[i]), &Word::gen(&gens[j])));
        }
    }
    let rows = rng.random_range(k..=k + 2);
    for _ in 0..rows {
        let mut letters = Vec::new();
        for g in &gens {
            let e: i64 = rng.random_range(-MAX_ENTRY..=MAX_ENTRY);
            letters.push((g.clone(), e));
        }
        // rotate the letter order so relators are not all in one order
        let shift = rng.random_range(0..k);
        letters.rotate_left(shift);
        let w = Word::reduce(letters.into_iter().flat_map(|(g, e)| {
            std::iter::repeat_n(Letter::new(g, e < 0), e.unsigned_abs() as usize)
        }));
        rels.push(w);
    }
    let p = FpPresentation::new(gens, rels).ok()?;
    h1(&p).order().is_some().then_some(p)
}

fn criterion_8(s: &mut Suite, opts: &RunOptions) {
    let mut problems = Vec::new();
    let mut rng = StdRng::seed_from_u64(RANDOM_SEED);
    let mut checked = 0;
    let mut largest = BigInt::from(0);
    while checked < RANDOM_CORPUS {
        let Some(p) = random_abelian(&mut rng) else { continue };
        checked += 1;
        let order = h1(&p).order().expect("finite");
        match todd_coxeter(&p, &[], &opts.budget) {
            Ok(e) if BigInt::from(e.index) == order => {}
            other => problems.push(format!("{p}: SNF order {order}, enumeration {other:?}")),
        }
        largest = largest.max(order);
    }
    s.record(8, "SNF order equals coset-enumeration index", &problems, format!("{checked} presentations, largest order {largest}"));
}

fn criterion_9(s: &mut Suite) {
    let mut problems = Vec::new();
    let mut replayed = 0;
    for (label, c) in &s.certificates {
        if !c.verdict.is_conclusive() {
            continue;
        }
        replayed += 1;
        if let Err(e) = replay(c) {
            problems.push(format!("{label}: {e}"));
        }
    }
    for r in &s.reports {
        for o in replay_report(r) {
            if let Err(e) = o.result {
                problems.push(format!("report {}/{}: {e}", o.entry, o.what));
            }
        }
    }
    s.record(9, "every conclusive certificate replays", &problems, format!("{replayed} certificates replayed"));
}

fn criterion_10(s: &mut Suite, opts: &RunOptions) {
    let mut problems = Vec::new();
    let mut runs = 0;
    for signs in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
        let mut texts: Vec<(String, String)> = Vec::new();
        for m in 1..=5 {
            texts.push((format!("X1({m})"), x1_text(m, signs)));
        }
        for n in 2..=10 {
            for m in 1..=3 {
                texts.push((format!("X{n}({m})"), xn_text(n, m, signs)));
            }
        }
        for m in 1..=3 {
            texts.push((format!("V({m})"), v_text(m, signs)));
            texts.push((format!("W({m})"), w_text(m, signs)));
        }
        for (label, text) in texts {
            let label = format!("{label} e1={} e3={}", signs.0, signs.1);
            let (r, _) = s.run(&label, &text, opts);
            runs += 1;
            let x = r.entry("X").unwrap();
            if !matches!(x.certificate.as_ref().map(|c| &c.verdict), Some(Verdict::Trivial)) || r.status != Status::Pass {
                problems.push(format!("{label}: {:?}", x.certificate.as_ref().map(|c| c.verdict.to_string())));
            }
        }
    }
    s.record(10, "criteria 1-3 under all four sign choices", &problems, format!("{runs} manifolds certified trivial"));
}

fn main() {
    let opts = RunOptions { budget: Budget::default(), certify: true };
    assert_eq!(opts.budget, Budget::default(), "acceptance runs use the default budget");
    let mut s = Suite { failures: Vec::new(), certificates: Vec::new(), reports: Vec::new(), outputs: Vec::new() };
    let t = Instant::now();
    criterion_1(&mut s, &opts);
    criterion_2(&mut s, &opts);
    criterion_3(&mut s, &opts);
    criterion_4(&mut s, &opts);
    criterion_5(&mut s, &opts);
    criterion_6(&mut s, &opts);
    criterion_7(&mut s, &opts);
    criterion_8(&mut s, &opts);
    criterion_9(&mut s);
    criterion_10(&mut s, &opts);
    println!("acceptance: {} of 10 criteria passed in {:.1?}", 10 - s.failures.len(), t.elapsed());
    if !s.failures.is_empty() {
        println!("acceptance: failed criteria {:?}", s.failures);
        std::process::exit(1);
    }
}

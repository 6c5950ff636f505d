//! Exit criteria. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see
//! them in order.

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use meldlab::adversary::{build_wk, wk_potential_drop, GoldenTable};
use meldlab::harness::{bench, randomized_rows, verify, CheckResult, Suite, SuiteReport};
use meldlab::potentials::{check_ks_inequality, potential};
use meldlab::reachability::{compile_generation, replay, replay_with_ledger};
use meldlab::workload::{random_heap, WorkloadSpec};
use meldlab::{validate, Ledger, Melder, OpKind, PotentialKind, Strategy, Tree, CONSTANTS};

const SEED: u64 = 20_240_601;

fn line(n: u32, title: &str, ok: bool, detail: impl AsRef<str>) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n:>2} {verdict} {title}: {}", detail.as_ref());
}

fn all_reports() -> &'static [SuiteReport] {
    static ALL: OnceLock<Vec<SuiteReport>> = OnceLock::new();
    ALL.get_or_init(|| verify(Suite::All, None, SEED).expect("default scales are valid"))
}

fn checks<'a>(prefix: &'a str) -> impl Iterator<Item = &'static CheckResult> + 'a {
    all_reports().iter().flat_map(|r| &r.checks).filter(move |c| c.name.starts_with(prefix))
}

// Local oracles for the bounds, independent of the library's bound table.
fn phi() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

fn log_phi(x: f64) -> f64 {
    x.ln() / phi().ln()
}

fn ledger(strategy: Strategy, kind: &PotentialKind) -> Ledger {
    let spec = WorkloadSpec::new(strategy, 100_000, SEED);
    let r = bench(&spec, kind).unwrap();
    assert!(r.ledger.entries.iter().filter(|e| e.op != OpKind::Empty).count() > 100_000);
    r.ledger
}

/// Smallest `bound - amortized` over union and del_min entries.
fn worst(l: &Ledger, union: impl Fn(&[u64], u64) -> f64, del_min: impl Fn(u64) -> f64) -> f64 {
    l.entries
        .iter()
        .filter_map(|e| match e.op {
            OpKind::Union => Some(union(&e.sz_in, e.sz_out) - e.amortized),
            OpKind::DelMin => Some(del_min(e.sz_in[0]) - e.amortized),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn c01_exact_cost_law() {
    let start = Instant::now();
    let r = verify(Suite::Costs, Some(10_000), SEED).unwrap();
    let took = start.elapsed();
    let unions: Vec<&CheckResult> = r[0].checks.iter().filter(|c| c.name.starts_with("cost_union")).collect();
    let ok = unions.len() == 4
        && unions.iter().all(|c| c.checked == 10_000)
        && r[0].checks.iter().filter(|c| c.name.starts_with("cost_")).all(|c| c.passed && c.checked > 0)
        && took < Duration::from_secs(10);
    line(1, "exact cost law", ok, format!("4 strategies x 10^4 pairs in {took:.2?}"));
    assert!(ok, "{:#?}", r[0].checks);
}

#[test]
fn c02_rank_within_log2_sz() {
    let log_rank: Vec<&CheckResult> = checks("rank_log_size").collect();
    let total: u64 = log_rank.iter().map(|c| c.checked).sum();
    let bad: u64 = log_rank.iter().map(|c| c.violations).sum();
    let ok = bad == 0 && total > 100_000;
    line(2, "2^rank <= sz on every leftist heap", ok, format!("{total} heaps, {bad} violations"));
    assert!(ok);
}

#[test]
fn c03_weight_biased_log_phi_bounds() {
    let l = ledger(Strategy::WeightBiased, &PotentialKind::KsClamped);
    let w = worst(&l, |s, _| log_phi((s[0] + s[1]) as f64), |s| log_phi(s as f64));
    let lib = l.min_slack().unwrap();
    let ok = w >= -1e-9 && lib >= -1e-9;
    line(3, "weight-biased amortized bounds", ok, format!("worst slack {w:.6} over {} entries", l.entries.len()));
    assert!(ok);
}

#[test]
fn c04_rank_potential_and_convex_bounds() {
    let mut ok = true;
    let mut detail = Vec::new();
    for s in [Strategy::WeightBiased, Strategy::RankBiased] {
        let l = ledger(s, &PotentialKind::Rank);
        let w = worst(&l, |_, out| (out as f64).log2(), |sz| 2.0 * (sz as f64).log2());
        ok &= w >= -1e-9;
        detail.push(format!("{s} {w:.4}"));
    }
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let l = ledger(Strategy::WeightBiased, &PotentialKind::blend(lambda).unwrap());
        let w = worst(
            &l,
            |s, out| lambda * (out as f64).log2() + (1.0 - lambda) * log_phi((s[0] + s[1]) as f64),
            |sz| lambda * 2.0 * (sz as f64).log2() + (1.0 - lambda) * log_phi(sz as f64),
        );
        ok &= w >= -1e-9;
        detail.push(format!("lambda={lambda} {w:.4}"));
    }
    line(4, "rank-potential and blended bounds", ok, detail.join(", "));
    assert!(ok);
}

#[test]
fn c05_ks_inequality_and_constants() {
    let p = phi();
    let beta = p.powf(p + 2.0);
    let alpha = p.powf(2.0 * p - 1.0);
    let mut bad = 0;
    for m in 1..=2048u64 {
        for n in 1..=2048u64 {
            let (mf, nf) = (m as f64, n as f64);
            let lhs = (beta * nf / (mf + nf)).ln() / beta.ln();
            let rhs = ((mf + nf) / mf).ln() / alpha.ln();
            if rhs - lhs < -1e-12 || !check_ks_inequality(m, n) {
                bad += 1;
            }
        }
    }
    let c = &*CONSTANTS;
    let id1 = (c.phi * c.phi - c.phi - 1.0).abs();
    let id2 = (c.log_alpha(c.phi) + 2.0 * c.log_beta(c.phi) - 1.0).abs();
    let union_bound = checks("union_bound_runtime").all(|c| c.passed && c.checked > 0);
    let ok = bad == 0 && id1 <= 1e-12 && id2 <= 1e-12 && union_bound;
    line(
        5,
        "log inequality grid, runtime union bound, constants",
        ok,
        format!("{bad} grid violations, identities {id1:e} {id2:e}, runtime check {union_bound}"),
    );
    assert!(ok);
}

#[test]
fn c06_wk_family() {
    let start = Instant::now();
    let beta = phi().powf(phi() + 2.0);
    let mut failures = Vec::new();
    for k in 2..=20u32 {
        let f = build_wk(k).unwrap();
        let p = |e: u32| 2f64.powi(e as i32);
        let closed = -1.0
            + ((p(k + 2) - 6.0) * (p(k + 1) - 4.0) / ((p(k + 2) - 7.0) * (p(k + 1) - 1.0))).ln() / beta.ln();
        let ks = wk_potential_drop(&f, &PotentialKind::KsUnclamped).unwrap();
        let rank_drop = potential(&f.v, &PotentialKind::Rank) - potential(&f.w, &PotentialKind::Rank);
        let checks = [
            ("sz", f.w.sz() == (1u64 << (k + 2)) - 6),
            ("cost", f.del_min_cost == 2 * k as u64),
            ("rank V", f.v.rank() == k),
            ("rank drop", rank_drop == -1.0),
            ("ks drop", (ks - closed).abs() < 1e-9),
            ("V_k is weight-biased", !validate(&f.v, Strategy::WeightBiased).is_empty()),
        ];
        failures.extend(checks.iter().filter(|c| !c.1).map(|c| format!("k={k}: {}", c.0)));
    }
    let took = start.elapsed();
    let ok = failures.is_empty() && took < Duration::from_secs(5);
    line(6, "W_k family, k = 2..20", ok, format!("{took:.2?}, failures {failures:?}"));
    assert!(ok, "{failures:?}");
}

#[test]
fn c07_golden_trees() {
    let start = Instant::now();
    let r = verify(Suite::Golden, Some(100_000), SEED).unwrap();
    let took = start.elapsed();
    let gap = r[0].check("theorem2_gap").unwrap();
    let recreation = r[0].check("golden_self_recreation").unwrap();

    // independent G-sequence and rank recurrence
    let n_max = 1_000_000usize;
    let mut l = vec![0usize; n_max + 1];
    for n in 1..=n_max {
        l[n] = n - l[l[n - 1]];
    }
    let mut rank = vec![0u32; n_max + 1];
    for n in 1..=n_max {
        rank[n] = rank[n - 1 - l[n - 1]] + 1;
    }
    let mut min_gap = f64::INFINITY;
    for n in 0..=n_max {
        let g = (rank[l[n]] + rank[n - l[n]]) as f64 - (log_phi((n + 1) as f64) - 2.0);
        min_gap = min_gap.min(g);
    }
    let table = GoldenTable::new(1000);
    let table_ok = (0..=1000).all(|n| table.rank(n) == rank[n] && table.gseq().g(n) == l[n]);

    let ok = r[0].passed()
        && gap.checked == 1_000_001
        && recreation.checked == 10_001
        && min_gap >= 0.0
        && table_ok
        && took < Duration::from_secs(60);
    line(7, "golden trees", ok, format!("{took:.2?}, min gap {min_gap:.6}"));
    assert!(ok, "{:#?}", r[0].checks);
}

#[test]
fn c08_generation_round_trip() {
    let r = verify(Suite::Reachability, Some(500), SEED).unwrap();
    let round = r[0].check("round_trip").unwrap();
    let control = r[0].check("keep_on_tie_control").unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut m = Melder::new(Strategy::RankBiased);
    let mut direct = true;
    for _ in 0..50 {
        let n = rng.gen_range(0..=256);
        let x = random_heap(&mut m, &mut rng, n, 32);
        let p = compile_generation(&x).unwrap();
        direct &= replay(&p, &mut Melder::new(Strategy::RankBiased)).unwrap() == x;
    }
    for k in 2..=12 {
        let w = build_wk(k).unwrap().w;
        let p = compile_generation(&w).unwrap();
        direct &= replay(&p, &mut Melder::new(Strategy::RankBiased)).unwrap() == w;
    }
    let ok = round.passed && round.checked == 511 && control.passed && direct;
    line(8, "generation round trip", ok, format!("{}; {}", round.detail, control.detail));
    assert!(ok);
}

#[test]
fn c09_ledger_telescoping() {
    let tele: Vec<&CheckResult> = checks("telescoping").collect();
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9);
    for s in ["skew", "weight", "rank", "randomized:0.5:3"] {
        for kind in ["rank", "prank", "ks", "ks-unclamped", "st", "convex:0.3"] {
            let spec = WorkloadSpec::new(s.parse().unwrap(), rng.gen_range(100..3000), rng.gen());
            let p = spec.program().unwrap();
            let kind: PotentialKind = kind.parse().unwrap();
            let (r, l) = replay_with_ledger(&p, &mut Melder::new(spec.strategy), &kind).unwrap();
            let phi_final: f64 = r.live.iter().map(|(_, t)| potential(t, &kind)).sum();
            let lhs: f64 = l.entries.iter().map(|e| e.amortized).sum::<f64>() - l.total_actual() as f64;
            worst = worst.max((lhs - phi_final).abs());
        }
    }
    let ok = tele.iter().all(|c| c.passed) && tele.len() >= 9 && worst < 1e-9;
    line(9, "ledger telescoping", ok, format!("{} suite checks, direct max error {worst:e}", tele.len()));
    assert!(ok);
}

fn st_oracle(t: &Tree<i64>) -> u64 {
    let mut count = 0;
    let mut stack = vec![t];
    while let Some(x) = stack.pop() {
        if let Some(n) = x.root() {
            count += u64::from(n.left().size() < n.right().size());
            stack.push(n.left());
            stack.push(n.right());
        }
    }
    count
}

#[test]
fn c10_st_indicator_degenerate() {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 10);
    let mut m = Melder::new(Strategy::WeightBiased);
    let mut nonzero = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(0..=512);
        let h = random_heap(&mut m, &mut rng, n, 1 << 16);
        if potential(&h, &PotentialKind::StIndicator) != 0.0 || st_oracle(&h) != 0 {
            nonzero += 1;
        }
    }
    let suite = checks("st_indicator_zero").all(|c| c.passed && c.checked >= 1000);
    let ok = nonzero == 0 && suite;
    line(10, "indicator potential vanishes on weight-biased heaps", ok, format!("{nonzero} of 1000 nonzero"));
    assert!(ok);
}

#[test]
fn c11_randomized_heaps() {
    let rows = randomized_rows(0.5, 1 << 14, 50, SEED);
    let union = rows.iter().find(|r| r.op == "union").unwrap();
    let gate = union.mean <= 2.0 + 0.1;

    let mut spec = WorkloadSpec::new(Strategy::Skew, 20_000, SEED);
    let skew = bench(&spec, &PotentialKind::KsClamped).unwrap().ledger;
    spec.strategy = Strategy::randomized(1.0, SEED).unwrap();
    let rand = bench(&spec, &PotentialKind::KsClamped).unwrap().ledger;
    let same = skew.entries == rand.entries;

    let ok = gate && same;
    line(
        11,
        "randomized heaps (statistical)",
        ok,
        format!(
            "p=1/2 mean union ratio {:.4} (95% CI {:.4}..{:.4}), p=1 ledger identical to skew: {same}",
            union.mean, union.ci_low, union.ci_high
        ),
    );
    assert!(ok);
}

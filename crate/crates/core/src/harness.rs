//! Verification suites, workload benchmarks, randomized-heap experiments
//! and adversary tables. The CLI is a thin shell around this module.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::{
    build_wk, fibonacci_tree, golden_rows, unlabeled_meld, wk_drop_closed_form,
    wk_potential_drop, wk_potential_drop_full, wk_rows, write_golden_csv, write_wk_csv,
    GoldenTable,
};
use crate::error::{HeapError, ProgramError};
use crate::heap::{validate, Melder, Strategy, TieBreak};
use crate::ledger::{Ledger, OpKind};
use crate::measures::{caches_consistent, check_lemma2, rank_within_log2_sz, recompute_rank};
use crate::numfmt::sig12;
use crate::potentials::{ks_inequality_slack, potential, PotentialKind, Sum, CONSTANTS};
use crate::reachability::{compile_generation, preimage, replay, replay_traced, replay_with_ledger, Program, Replay};
use crate::tree::Tree;
use crate::workload::{random_heap, KeyDist, WorkloadSpec};
use crate::Key;

/// Tolerance of every floating-point bound check.
pub const TOL: f64 = 1e-9;

fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Costs,
    Leftist,
    Lemma2,
    Theorem1,
    Section3,
    Convex,
    Wk,
    Golden,
    Reachability,
    All,
}

impl Suite {
    pub const EACH: [Suite; 9] = [
        Suite::Costs,
        Suite::Leftist,
        Suite::Lemma2,
        Suite::Theorem1,
        Suite::Section3,
        Suite::Convex,
        Suite::Wk,
        Suite::Golden,
        Suite::Reachability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Costs => "costs",
            Suite::Leftist => "leftist",
            Suite::Lemma2 => "lemma2",
            Suite::Theorem1 => "theorem1",
            Suite::Section3 => "section3",
            Suite::Convex => "convex",
            Suite::Wk => "wk",
            Suite::Golden => "golden",
            Suite::Reachability => "reachability",
            Suite::All => "all",
        }
    }

    /// Heap pairs for `costs` and `lemma2`, workload operations for
    /// `leftist`, `theorem1`, `section3` and `convex`, the largest `k` for
    /// `wk`, the largest `n` for `golden`, random heaps for `reachability`.
    pub fn default_scale(self) -> u64 {
        match self {
            Suite::Costs | Suite::Lemma2 | Suite::Leftist => 10_000,
            Suite::Theorem1 | Suite::Section3 | Suite::Convex => 100_000,
            Suite::Wk => 20,
            Suite::Golden => 100_000,
            Suite::Reachability => 500,
            Suite::All => 0,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::EACH
            .iter()
            .chain([Suite::All].iter())
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub violations: u64,
    /// The first few violations, spelled out.
    pub examples: Vec<String>,
    /// Smallest `bound - value` seen, for checks that have one.
    pub worst_slack: Option<f64>,
    pub detail: String,
    pub statistical: bool,
}

struct Check {
    r: CheckResult,
    tol: f64,
}

impl Check {
    fn new(name: impl Into<String>) -> Self {
        Check {
            r: CheckResult {
                name: name.into(),
                passed: true,
                checked: 0,
                violations: 0,
                examples: Vec::new(),
                worst_slack: None,
                detail: String::new(),
                statistical: false,
            },
            tol: TOL,
        }
    }

    fn tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn slack(&mut self, s: f64, what: impl FnOnce() -> String) {
        self.r.checked += 1;
        self.r.worst_slack = Some(self.r.worst_slack.map_or(s, |w| w.min(s)));
        if !(s >= -self.tol) {
            self.fail(what);
        }
    }

    fn holds(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.r.checked += 1;
        if !ok {
            self.fail(what);
        }
    }

    fn fail(&mut self, what: impl FnOnce() -> String) {
        self.r.violations += 1;
        if self.r.examples.len() < 5 {
            self.r.examples.push(what());
        }
    }

    fn done(mut self, detail: impl Into<String>) -> CheckResult {
        self.r.passed = self.r.violations == 0;
        self.r.detail = detail.into();
        self.r
    }

    fn finish(self) -> CheckResult {
        let d = format!("{} checked, {} violations", self.r.checked, self.r.violations);
        self.done(d)
    }

    fn rank_log_size(&mut self, t: &Tree<Key>) {
        self.holds(rank_within_log2_sz(t), || format!("rank {} but sz {}", t.rank(), t.sz()));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub scale: u64,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// 0 when every check passed, 1 otherwise.
pub fn exit_code(reports: &[SuiteReport]) -> i32 {
    if reports.iter().all(SuiteReport::passed) {
        0
    } else {
        1
    }
}

/// Runs one suite at `scale` (its default when `None`), or every suite at
/// its default scale for [`Suite::All`].
pub fn verify(suite: Suite, scale: Option<u64>, seed: u64) -> Result<Vec<SuiteReport>, HeapError> {
    match suite {
        Suite::All => Suite::EACH
            .par_iter()
            .map(|&s| run_suite(s, s.default_scale(), seed))
            .collect(),
        s => Ok(vec![run_suite(s, scale.unwrap_or_else(|| s.default_scale()), seed)?]),
    }
}

fn run_suite(suite: Suite, scale: u64, seed: u64) -> Result<SuiteReport, HeapError> {
    let n = scale as usize;
    let checks = match suite {
        Suite::Costs => suite_costs(scale, seed),
        Suite::Leftist => suite_leftist(n, seed),
        Suite::Lemma2 => suite_lemma2(scale, seed),
        Suite::Theorem1 => suite_theorem1(n, seed),
        Suite::Section3 => suite_section3(n, seed),
        Suite::Convex => suite_convex(n, seed),
        Suite::Wk => suite_wk(scale)?,
        Suite::Golden => suite_golden(n)?,
        Suite::Reachability => suite_reachability(n, seed)?,
        Suite::All => return Err(HeapError::Scale("`all` is not a single suite".into())),
    };
    Ok(SuiteReport { suite: suite.name().into(), scale, seed, checks })
}

pub const VERIFY_CSV_HEADER: &str =
    "suite,check,passed,checked,violations,worst_slack,statistical,detail";

pub fn write_verify_csv(reports: &[SuiteReport], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{VERIFY_CSV_HEADER}")?;
    for r in reports {
        for c in &r.checks {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                r.suite,
                c.name,
                c.passed,
                c.checked,
                c.violations,
                c.worst_slack.map_or_else(|| "n/a".into(), sig12),
                c.statistical,
                c.detail.replace(',', ";")
            )?;
        }
    }
    Ok(())
}

pub fn write_verify_json(reports: &[SuiteReport], mut w: impl Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut w, reports)?;
    writeln!(w)
}

fn pool_strategies(seed: u64) -> [Strategy; 4] {
    [
        Strategy::Skew,
        Strategy::WeightBiased,
        Strategy::RankBiased,
        Strategy::Randomized { p: 0.5, seed },
    ]
}

/// Random heap pairs drawn from an evolving pool: heaps grow by unions
/// and inserts and are reset once they exceed 4096 keys.
struct Pool {
    heaps: Vec<Tree<Key>>,
    rng: ChaCha8Rng,
}

const POOL_MAX: u64 = 4096;

impl Pool {
    fn new(rng: ChaCha8Rng) -> Self {
        Pool { heaps: vec![Tree::empty(); 16], rng }
    }

    fn pair(&mut self) -> (usize, usize) {
        let n = self.heaps.len();
        (self.rng.gen_range(0..n), self.rng.gen_range(0..n))
    }

    fn update(&mut self, m: &mut Melder, i: usize, j: usize, z: Tree<Key>) {
        self.heaps[i] = if z.size() <= POOL_MAX { z } else { Tree::empty() };
        if i != j {
            let k = self.rng.gen_range(1..=8);
            for _ in 0..k {
                if self.heaps[j].size() < POOL_MAX {
                    let key = self.rng.gen_range(0..1 << 20);
                    self.heaps[j] = m.insert(key, &self.heaps[j]);
                }
            }
        }
    }
}

fn suite_costs(pairs: u64, seed: u64) -> Vec<CheckResult> {
    pool_strategies(seed)
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, &s)| cost_law(s, pairs, stream(seed, 100 + i as u64)))
        .collect()
}

fn cost_law(strategy: Strategy, pairs: u64, rng: ChaCha8Rng) -> Vec<CheckResult> {
    let mut m = Melder::new(strategy);
    let mut pool = Pool::new(rng);
    let mut union = Check::new(format!("cost_union[{strategy}]"));
    let mut del = Check::new(format!("cost_del_min[{strategy}]"));
    let mut log_rank = Check::new(format!("rank_log_size[{strategy}]"));
    for _ in 0..pairs {
        let (i, j) = pool.pair();
        let (x, y) = (pool.heaps[i].clone(), pool.heaps[j].clone());
        let (z, cost) = m.measure(|m| m.union(&x, &y));
        let expect = recompute_rank(&x) as u64 + recompute_rank(&y) as u64;
        union.holds(cost == expect, || {
            format!("union of sizes {} and {}: {cost} comparisons, expected {expect}", x.size(), y.size())
        });
        let mut next = z.clone();
        if let Some(n) = z.root() {
            let (d, cost) = m.measure(|m| m.del_min(&z).expect("non-empty"));
            let expect = recompute_rank(n.left()) as u64 + recompute_rank(n.right()) as u64;
            del.holds(cost == expect, || {
                format!("del_min of size {}: {cost} comparisons, expected {expect}", z.size())
            });
            if strategy.is_leftist() {
                log_rank.rank_log_size(&d);
            }
            if pool.rng.gen_bool(0.5) {
                next = d;
            }
        }
        if strategy.is_leftist() {
            log_rank.rank_log_size(&z);
        }
        pool.update(&mut m, i, j, next);
    }
    let mut out = vec![
        union.done(format!("T = rank x + rank y exact on {pairs} pairs")),
        del.finish(),
    ];
    if strategy.is_leftist() {
        out.push(log_rank.finish());
    }
    out
}

fn workload(strategy: Strategy, n_ops: usize, seed: u64) -> Program<Key> {
    WorkloadSpec::new(strategy, n_ops, seed).program().expect("default workload specs are valid")
}

/// Replays `p` with a ledger, checking `2^rank <= sz` on every produced heap.
fn ledgered(
    p: &Program<Key>,
    strategy: Strategy,
    kind: &PotentialKind,
    log_rank: &mut Check,
) -> (Replay<Key>, Ledger) {
    let mut m = Melder::new(strategy);
    let (r, l) = replay_traced(p, &mut m, Some(kind), |_, t| {
        if strategy.is_leftist() {
            log_rank.rank_log_size(t);
        }
    })
    .expect("generated workloads replay");
    (r, l.expect("ledger requested"))
}

/// `|sum(amortized) - sum(actual) - (Phi(final) - Phi(initial))|`; a program
/// starts with no heaps, so `Phi(initial)` is zero.
pub fn telescoping_error<K>(r: &Replay<K>, l: &Ledger) -> f64 {
    let mut phi = Sum::default();
    for (_, t) in &r.live {
        phi.add(potential(t, &l.kind));
    }
    (l.total_delta() - phi.value()).abs()
}

fn telescoping(name: String, r: &Replay<Key>, l: &Ledger) -> CheckResult {
    let mut c = Check::new(name);
    let err = telescoping_error(r, l);
    c.slack(TOL - err, || format!("telescoping error {err:e}"));
    c.done(format!("|error| = {}", sig12(err)))
}

/// Per-entry bound check over a ledger, split by operation.
fn bound_checks(label: &str, l: &Ledger) -> Vec<CheckResult> {
    [OpKind::Union, OpKind::DelMin]
        .iter()
        .map(|&op| {
            let mut c = Check::new(format!("{label}_{op}"));
            for (i, e) in l.entries.iter().enumerate().filter(|(_, e)| e.op == op) {
                let s = e.slack.expect("bound-bearing potential");
                c.slack(s, || format!("entry {i}: amortized {} > bound {}", e.amortized, s + e.amortized));
            }
            c.finish()
        })
        .collect()
}

fn suite_leftist(n_ops: usize, seed: u64) -> Vec<CheckResult> {
    let runs: Vec<(Strategy, KeyDist)> = vec![
        (Strategy::WeightBiased, KeyDist::Permutation),
        (Strategy::RankBiased, KeyDist::Uniform { lo: 0, hi: 63 }),
    ];
    let mut out: Vec<CheckResult> = runs
        .par_iter()
        .flat_map_iter(|&(s, keys)| {
            let mut spec = WorkloadSpec::new(s, n_ops, seed);
            spec.keys = keys;
            let p = spec.program().expect("valid spec");
            let mut log_rank = Check::new(format!("rank_log_size[{s}]"));
            let mut valid = Check::new(format!("valid[{s}]"));
            let mut m = Melder::new(s);
            let (r, _) = replay_traced(&p, &mut m, None, |i, t| {
                log_rank.rank_log_size(t);
                if i % 64 == 0 {
                    let v = validate(t, s);
                    valid.holds(v.is_empty() && caches_consistent(t), || format!("instruction {i}: {v:?}"));
                }
            })
            .expect("generated workloads replay");
            for (reg, t) in &r.live {
                let v = validate(t, s);
                valid.holds(v.is_empty(), || format!("final {reg}: {v:?}"));
            }
            vec![log_rank.finish(), valid.finish()]
        })
        .collect();

    let mut rng = stream(seed, 200);
    let mut m = Melder::new(Strategy::WeightBiased);
    let mut st = Check::new("st_indicator_zero").tol(0.0);
    let mut log_rank = Check::new("rank_log_size[random weight-biased]");
    for _ in 0..(n_ops / 10).max(1) {
        let size = rng.gen_range(0..=512);
        let h = random_heap(&mut m, &mut rng, size, 1 << 20);
        log_rank.rank_log_size(&h);
        let phi = potential(&h, &PotentialKind::StIndicator);
        st.holds(phi == 0.0, || format!("size {}: potential {phi}", h.size()));
    }
    out.push(st.finish());
    out.push(log_rank.finish());
    out
}

fn suite_lemma2(pairs: u64, seed: u64) -> Vec<CheckResult> {
    let mut m = Melder::new(Strategy::RankBiased);
    let mut pool = Pool::new(stream(seed, 300));
    let mut parts: Vec<Check> = ["lemma2_i", "lemma2_ii", "lemma2_iii", "lemma2_iv"]
        .into_iter()
        .map(Check::new)
        .collect();
    let mut log_rank = Check::new("rank_log_size[rank]");
    for _ in 0..pairs {
        let (i, j) = pool.pair();
        let (x, y) = (pool.heaps[i].clone(), pool.heaps[j].clone());
        let rep = check_lemma2(&x, &y);
        let what = || format!("sizes {} and {}: {rep:?}", x.size(), y.size());
        for (c, ok) in parts.iter_mut().zip([rep.i, rep.ii, rep.iii, rep.iv]) {
            c.holds(ok, what);
        }
        let z = m.union(&x, &y);
        log_rank.rank_log_size(&z);
        pool.update(&mut m, i, j, z);
    }
    parts.into_iter().map(Check::finish).chain([log_rank.finish()]).collect()
}

fn suite_theorem1(n_ops: usize, seed: u64) -> Vec<CheckResult> {
    let c = &*CONSTANTS;
    let s = Strategy::WeightBiased;
    let p = workload(s, n_ops, seed);
    let mut log_rank = Check::new("rank_log_size[weight-biased]");
    let (r, l) = ledgered(&p, s, &PotentialKind::KsClamped, &mut log_rank);
    let mut out = bound_checks("theorem1", &l);

    let mut union_bound = Check::new("union_bound_runtime");
    for (i, e) in l.entries.iter().enumerate().filter(|(_, e)| e.op == OpKind::Union) {
        let b = c.log_alpha(e.sz_out as f64)
            + c.log_beta(e.sz_in[0] as f64)
            + c.log_beta(e.sz_in[1] as f64);
        union_bound.slack(b - e.amortized, || format!("entry {i}: amortized {} > {b}", e.amortized));
    }
    out.push(union_bound.finish());
    out.push(telescoping("telescoping[ks]".into(), &r, &l));
    out.push(log_rank.finish());

    let mut ks = Check::new("ks_inequality_grid").tol(1e-12);
    for m in 1..=2048u64 {
        for n in 1..=2048u64 {
            let s = ks_inequality_slack(m, n);
            ks.slack(s, || format!("m={m} n={n}: slack {s:e}"));
        }
    }
    out.push(ks.finish());

    let mut consts = Check::new("constants").tol(1e-12);
    let id1 = c.phi * c.phi - (c.phi + 1.0);
    let id2 = c.log_alpha(c.phi) + 2.0 * c.log_beta(c.phi) - 1.0;
    consts.slack(-id1.abs(), || format!("phi^2 - phi - 1 = {id1:e}"));
    consts.slack(-id2.abs(), || format!("log_alpha phi + 2 log_beta phi - 1 = {id2:e}"));
    out.push(consts.finish());

    let mut order = Check::new("node_term_order");
    let mut range = Check::new("ks_clamped_range");
    for a in 1..=256u64 {
        for b in a..=256u64 {
            for kind in [PotentialKind::KsClamped, PotentialKind::KsUnclamped] {
                let fwd = kind.node_term(a, b).expect("node-additive");
                let rev = kind.node_term(b, a).expect("node-additive");
                order.slack(fwd - rev, || format!("{kind} sz {a} vs {b}: {rev} > {fwd}"));
            }
            for (t, u) in [(a, b), (b, a)] {
                let v = PotentialKind::KsClamped.node_term(t, u).expect("node-additive");
                range.holds((0.0..=1.0).contains(&v), || format!("sz {t}, {u}: {v}"));
            }
        }
    }
    out.push(order.finish());
    out.push(range.finish());
    out
}

fn suite_section3(n_ops: usize, seed: u64) -> Vec<CheckResult> {
    [Strategy::WeightBiased, Strategy::RankBiased]
        .par_iter()
        .flat_map_iter(|&s| {
            let p = workload(s, n_ops, seed);
            let mut log_rank = Check::new(format!("rank_log_size[{s}]"));
            let (r, l) = ledgered(&p, s, &PotentialKind::Rank, &mut log_rank);
            let mut out = bound_checks(&format!("section3[{s}]"), &l);
            out.push(telescoping(format!("telescoping[rank,{s}]"), &r, &l));
            out.push(log_rank.finish());
            out
        })
        .collect()
}

/// The blend weights checked by the convex suite.
pub const LAMBDAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn suite_convex(n_ops: usize, seed: u64) -> Vec<CheckResult> {
    let s = Strategy::WeightBiased;
    let p = workload(s, n_ops, seed);
    LAMBDAS
        .par_iter()
        .flat_map_iter(|&lambda| {
            let kind = PotentialKind::blend(lambda).expect("lambda in range");
            let mut log_rank = Check::new(format!("rank_log_size[lambda={lambda}]"));
            let (r, l) = ledgered(&p, s, &kind, &mut log_rank);
            let mut out = bound_checks(&format!("convex[lambda={lambda}]"), &l);
            out.push(telescoping(format!("telescoping[lambda={lambda}]"), &r, &l));
            out
        })
        .collect()
}

const WK_MAX: u64 = 60;

fn suite_wk(k_max: u64) -> Result<Vec<CheckResult>, HeapError> {
    if !(2..=WK_MAX).contains(&k_max) {
        return Err(HeapError::Scale(format!("wk needs 2 <= k <= {WK_MAX}, got {k_max}")));
    }
    let mut size = Check::new("wk_size");
    let mut cost = Check::new("wk_del_min_cost");
    let mut rank_v = Check::new("wk_rank_v");
    let mut drop_rank = Check::new("wk_drop_rank").tol(0.0);
    let mut drop_ks = Check::new("wk_drop_ks_unclamped").tol(0.0);
    let mut dual = Check::new("wk_drop_dual").tol(0.0);
    let mut v_weight = Check::new("wk_v_not_weight_biased");
    let mut w_rank = Check::new("wk_w_rank_biased");
    let mut log_rank = Check::new("rank_log_size[wk]");
    for k in 2..=k_max as u32 {
        let f = build_wk(k)?;
        let expect_sz = (1u64 << (k + 2)) - 6;
        size.holds(f.w.sz() == expect_sz, || format!("k={k}: sz {} != {expect_sz}", f.w.sz()));
        cost.holds(f.del_min_cost == 2 * k as u64, || format!("k={k}: cost {}", f.del_min_cost));
        rank_v.holds(f.v.rank() == k, || format!("k={k}: rank V = {}", f.v.rank()));
        let dr = wk_potential_drop(&f, &PotentialKind::Rank)?;
        drop_rank.holds(dr == -1.0, || format!("k={k}: rank drop {dr}"));
        let dk = wk_potential_drop(&f, &PotentialKind::KsUnclamped)?;
        let diff = (dk - wk_drop_closed_form(k)).abs();
        drop_ks.slack(TOL - diff, || format!("k={k}: |direct - closed form| = {diff:e}"));
        let full = wk_potential_drop_full(&f, &PotentialKind::KsUnclamped);
        let dd = (full - dk).abs();
        dual.slack(TOL - dd, || format!("k={k}: |full - delta| = {dd:e}"));
        v_weight.holds(!validate(&f.v, Strategy::WeightBiased).is_empty(), || {
            format!("k={k}: V_k is weight-biased")
        });
        let wv = validate(&f.w, Strategy::RankBiased);
        w_rank.holds(wv.is_empty(), || format!("k={k}: {wv:?}"));
        log_rank.rank_log_size(&f.w);
        log_rank.rank_log_size(&f.v);
    }
    let ks_detail = format!(
        "max |closed form - direct| = {}",
        sig12(TOL - drop_ks.r.worst_slack.unwrap_or(TOL))
    );
    Ok(vec![
        size.finish(),
        cost.finish(),
        rank_v.finish(),
        drop_rank.finish(),
        drop_ks.done(ks_detail),
        dual.finish(),
        v_weight.finish(),
        w_rank.finish(),
        log_rank.finish(),
    ])
}

const GOLDEN_MAX: u64 = 10_000_000;

fn suite_golden(n_max: usize) -> Result<Vec<CheckResult>, HeapError> {
    if n_max as u64 > GOLDEN_MAX {
        return Err(HeapError::Scale(format!("golden needs n <= {GOLDEN_MAX}, got {n_max}")));
    }
    let table = GoldenTable::new(10 * n_max);
    let g = table.gseq();
    let shapes = table.shapes(n_max);

    let mut size = Check::new("golden_size");
    let mut weight = Check::new("golden_weight_leftist");
    let mut rank = Check::new("golden_rank_leftist");
    let mut mono = Check::new("golden_rank_monotone");
    for (n, s) in shapes.iter().enumerate() {
        size.holds(s.size() == n as u64 && table.size(n) == n as u64, || format!("n={n}: size {}", s.size()));
        if let Some((l, r)) = s.children() {
            weight.holds(l.size() >= r.size(), || format!("n={n}: {} < {}", l.size(), r.size()));
            rank.holds(l.rank() >= r.rank(), || format!("n={n}: {} < {}", l.rank(), r.rank()));
        }
        if n > 0 {
            mono.holds(s.rank() >= shapes[n - 1].rank(), || format!("n={n}: rank drops"));
        }
    }

    let mut recreate = Check::new("golden_self_recreation");
    for n in 0..=(n_max / 10) {
        let (l, r) = (g.g(n), g.r(n));
        let (z, steps) = unlabeled_meld(&shapes[l], &shapes[r]);
        let expect = (shapes[l].rank() + shapes[r].rank()) as u64;
        recreate.holds(z == shapes[n] && steps == expect, || format!("n={n}: meld(G_{l}, G_{r})"));
    }

    let mut fib = Check::new("golden_fibonacci");
    let (mut a, mut b) = (1usize, 1usize);
    for k in 0.. {
        let n = b - 1;
        if n > n_max {
            break;
        }
        fib.holds(shapes[n] == fibonacci_tree(k), || format!("G_{n} vs Fibonacci tree {k}"));
        (a, b) = (b, a + b);
    }

    let mut gap = Check::new("theorem2_gap").tol(0.0);
    let mut del_gap = Check::new("del_min_gap").tol(0.0);
    for n in 0..=10 * n_max {
        let x = table.theorem2_gap(n);
        gap.slack(x, || format!("n={n}: gap {x}"));
        if n > 0 {
            let y = table.del_min_gap(n);
            del_gap.slack(y, || format!("n={n}: gap {y}"));
        }
    }
    let gap_detail = format!(
        "min gap {} over n <= {}",
        sig12(gap.r.worst_slack.unwrap_or(f64::NAN)),
        10 * n_max
    );
    Ok(vec![
        size.finish(),
        weight.finish(),
        rank.finish(),
        mono.finish(),
        recreate.finish(),
        fib.finish(),
        gap.done(gap_detail),
        del_gap.finish(),
    ])
}

fn suite_reachability(count: usize, seed: u64) -> Result<Vec<CheckResult>, HeapError> {
    let mut rng = stream(seed, 400);
    let mut m = Melder::new(Strategy::RankBiased);
    let mut heaps: Vec<Tree<Key>> = (0..count)
        .map(|_| {
            let n = rng.gen_range(0..=256);
            random_heap(&mut m, &mut rng, n, 64)
        })
        .collect();
    for k in 2..=12 {
        heaps.push(build_wk(k)?.w);
    }

    let mut round = Check::new("round_trip");
    let mut text = Check::new("program_text_round_trip");
    let mut pre = Check::new("preimage");
    let mut tele = Check::new("telescoping[programs]");
    let mut control = Check::new("keep_on_tie_control");
    let mut control_failures = 0u64;
    for (i, x) in heaps.iter().enumerate() {
        let p = compile_generation(x)?;
        let y = replay(&p, &mut Melder::new(Strategy::RankBiased));
        round.holds(y.as_ref() == Ok(x), || format!("heap {i} of size {}", x.size()));
        let reparsed = p.to_string().parse::<Program<Key>>().map(|q| q.instrs);
        text.holds(reparsed.as_ref() == Ok(&p.instrs), || format!("heap {i}"));
        let y0 = Melder::new(Strategy::RankBiased).union(&Tree::empty(), &preimage(x)?);
        pre.holds(&y0 == x, || format!("heap {i}"));
        for kind in [PotentialKind::Rank, PotentialKind::KsClamped] {
            let (r, l) = replay_with_ledger(&p, &mut Melder::new(Strategy::RankBiased), &kind)
                .expect("compiled programs replay");
            let err = telescoping_error(&r, &l);
            tele.slack(TOL - err, || format!("heap {i}, {kind}: {err:e}"));
        }
        let keep = replay(&p, &mut Melder::new(Strategy::RankBiased).with_tie_break(TieBreak::Keep));
        if keep.as_ref() != Ok(x) {
            control_failures += 1;
        }
    }
    control.holds(control_failures > 0, || "keep-on-tie reproduced every heap".into());
    let total = heaps.len();
    Ok(vec![
        round.done(format!("replay(compile_generation(x)) = x on {total} heaps")),
        text.finish(),
        pre.finish(),
        tele.finish(),
        control.done(format!("{control_failures} of {total} round trips fail with keep-on-tie")),
    ])
}

/// Aggregates of a ledger, recomputable from its entries alone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    pub ops: usize,
    pub total_actual: u64,
    pub total_amortized: f64,
    pub min_slack: Option<f64>,
    /// `max(0, -min_slack)`.
    pub max_violation: f64,
    /// Entries with slack below `-TOL`.
    pub violations: usize,
    /// Largest `actual / log2 sz` over unions (`sz` of the result) and
    /// del_mins (`sz` of the input), skipping `sz = 1`.
    pub worst_ratio: f64,
    pub mean_amortized: f64,
}

impl Aggregates {
    pub fn from_ledger(l: &Ledger) -> Self {
        let mut amortized = Sum::default();
        let mut worst_ratio: f64 = 0.0;
        for e in &l.entries {
            amortized.add(e.amortized);
            let sz = match e.op {
                OpKind::Union => e.sz_out,
                OpKind::DelMin => e.sz_in[0],
                _ => continue,
            };
            if sz > 1 {
                worst_ratio = worst_ratio.max(e.actual as f64 / (sz as f64).log2());
            }
        }
        let min_slack = l.min_slack();
        let ops = l.entries.len();
        Aggregates {
            ops,
            total_actual: l.total_actual(),
            total_amortized: amortized.value(),
            min_slack,
            max_violation: min_slack.map_or(0.0, |s| (-s).max(0.0)),
            violations: l.violations(TOL).count(),
            worst_ratio,
            mean_amortized: if ops == 0 { 0.0 } else { amortized.value() / ops as f64 },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: WorkloadSpec,
    pub potential: String,
    #[serde(skip)]
    pub ledger: Ledger,
    pub aggregates: Aggregates,
    pub telescoping_error: f64,
}

impl RunReport {
    /// 1 when a bound is violated or the ledger fails to telescope.
    pub fn exit_code(&self) -> i32 {
        if self.aggregates.violations > 0 || !(self.telescoping_error < TOL) {
            1
        } else {
            0
        }
    }

    pub fn summary_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }
}

/// Runs a workload under `spec.strategy` and records a ledger for `kind`.
pub fn bench(spec: &WorkloadSpec, kind: &PotentialKind) -> Result<RunReport, HeapError> {
    let p = spec.program()?;
    let mut m = Melder::new(spec.strategy);
    let (r, ledger) = replay_with_ledger(&p, &mut m, kind).expect("generated workloads replay");
    Ok(RunReport {
        config: spec.clone(),
        potential: kind.to_string(),
        aggregates: Aggregates::from_ledger(&ledger),
        telescoping_error: telescoping_error(&r, &ledger),
        ledger,
    })
}

/// One row of the randomized-heap table: per-operation comparisons divided
/// by `log2 sz`, summarized over trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RandomizedRow {
    pub p: f64,
    pub op: &'static str,
    pub n: usize,
    pub trials: usize,
    /// Mean over trials of the per-trial mean ratio.
    pub mean: f64,
    /// Largest single-operation ratio.
    pub max: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub statistical: bool,
}

pub const RANDOMIZED_CSV_HEADER: &str = "p,op,n,trials,mean,max,ci_low,ci_high,statistical";

/// The `p` values always present in a randomized table.
pub fn required_p() -> [f64; 3] {
    [0.5, 1.0 / CONSTANTS.phi, 1.0]
}

#[derive(Default)]
struct TrialStats {
    mean: Sum,
    count: u64,
    max: f64,
}

impl TrialStats {
    fn add(&mut self, cost: u64, sz: u64) {
        let r = cost as f64 / (sz as f64).log2();
        self.mean.add(r);
        self.count += 1;
        self.max = self.max.max(r);
    }

    fn mean(&self) -> f64 {
        self.mean.value() / self.count.max(1) as f64
    }
}

/// One trial: insert `n` keys into each of two heaps (keys from a random
/// permutation), union them, then delete the minimum `2n` times.
fn randomized_trial(p: f64, n: usize, seed: u64, trial: u64) -> [TrialStats; 3] {
    let mut rng = stream(seed, 1000 + trial);
    let mut keys: Vec<Key> = (0..2 * n as Key).collect();
    keys.shuffle(&mut rng);
    let mut m = Melder::new(Strategy::Randomized { p, seed }).fork(trial);
    let mut st: [TrialStats; 3] = Default::default();
    let (mut x, mut y) = (Tree::empty(), Tree::empty());
    for pair in keys.chunks(2) {
        for (h, &k) in [&mut x, &mut y].into_iter().zip(pair) {
            let (z, c) = m.measure(|m| m.insert(k, h));
            st[0].add(c, z.sz());
            *h = z;
        }
    }
    let (mut z, c) = m.measure(|m| m.union(&x, &y));
    st[1].add(c, z.sz());
    while !z.is_empty() {
        let sz = z.sz();
        let (d, c) = m.measure(|m| m.del_min(&z).expect("non-empty"));
        st[2].add(c, sz);
        z = d;
    }
    st
}

/// Randomized-heap table over `p_grid` plus [`required_p`], sorted by `p`.
/// Trials run in parallel, each with its own random stream.
pub fn randomized_table(p_grid: &[f64], n: usize, trials: usize, seed: u64) -> Result<Vec<RandomizedRow>, HeapError> {
    if n == 0 || trials == 0 {
        return Err(HeapError::Scale("randomized needs n >= 1 and trials >= 1".into()));
    }
    let mut ps: Vec<f64> = p_grid.to_vec();
    for p in &ps {
        Strategy::randomized(*p, seed)?;
    }
    ps.extend(required_p());
    ps.sort_by(f64::total_cmp);
    ps.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    Ok(ps.into_iter().flat_map(|p| randomized_rows(p, n, trials, seed)).collect())
}

/// The insert, union and del_min rows for one `p`, which must lie in `[0, 1]`.
pub fn randomized_rows(p: f64, n: usize, trials: usize, seed: u64) -> Vec<RandomizedRow> {
    let per: Vec<[TrialStats; 3]> = (0..trials as u64)
        .into_par_iter()
        .map(|t| randomized_trial(p, n, seed, t))
        .collect();
    ["insert", "union", "del_min"]
        .into_iter()
        .enumerate()
        .map(|(i, op)| {
            let means: Vec<f64> = per.iter().map(|s| s[i].mean()).collect();
            let mut sum = Sum::default();
            means.iter().for_each(|&x| sum.add(x));
            let mean = sum.value() / trials as f64;
            let var = if trials > 1 {
                means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials - 1) as f64
            } else {
                0.0
            };
            let half = 1.96 * (var / trials as f64).sqrt();
            RandomizedRow {
                p,
                op,
                n,
                trials,
                mean,
                max: per.iter().map(|s| s[i].max).fold(0.0, f64::max),
                ci_low: mean - half,
                ci_high: mean + half,
                statistical: true,
            }
        })
        .collect()
}

/// Soft threshold on the `p = 1/2` union row: mean ratio at most `2.1`.
pub fn randomized_gate(rows: &[RandomizedRow]) -> CheckResult {
    let mut c = Check::new("union_mean_ratio[p=0.5]").tol(0.0);
    for r in rows.iter().filter(|r| r.p == 0.5 && r.op == "union") {
        c.slack(2.1 - r.mean, || format!("mean ratio {} > 2.1", r.mean));
    }
    let mut r = c.finish();
    r.statistical = true;
    r
}

pub fn write_randomized_csv(rows: &[RandomizedRow], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{RANDOMIZED_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            sig12(r.p),
            r.op,
            r.n,
            r.trials,
            sig12(r.mean),
            sig12(r.max),
            sig12(r.ci_low),
            sig12(r.ci_high),
            r.statistical
        )?;
    }
    Ok(())
}

/// An adversary table request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryTable {
    /// Golden rows `0..=n`.
    Golden(usize),
    /// `W_k` rows for `k` in the range.
    Wk(u32, u32),
}

impl AdversaryTable {
    /// `which` is `golden` or `wk`; `param` is `N` or `A..B`. A single `N`
    /// means `0..=N` for golden and `2..=N` for wk.
    pub fn parse(which: &str, param: &str) -> Result<Self, HeapError> {
        let bad = || HeapError::Scale(format!("{which} parameter {param:?}"));
        let (lo, hi) = match param.split_once("..") {
            Some((a, b)) => (Some(a.parse::<u64>().map_err(|_| bad())?), b.parse::<u64>().map_err(|_| bad())?),
            None => (None, param.parse::<u64>().map_err(|_| bad())?),
        };
        match which {
            "golden" => {
                if lo.is_some_and(|l| l != 0) || hi > GOLDEN_MAX {
                    return Err(bad());
                }
                Ok(AdversaryTable::Golden(hi as usize))
            }
            "wk" => {
                let lo = lo.unwrap_or(2);
                if lo < 2 || lo > hi || hi > WK_MAX {
                    return Err(bad());
                }
                Ok(AdversaryTable::Wk(lo as u32, hi as u32))
            }
            _ => Err(HeapError::Scale(format!("unknown adversary table {which:?}"))),
        }
    }

    /// Writes the table as CSV or as JSON lines.
    pub fn write(&self, json: bool, mut w: impl Write) -> Result<(), HarnessIoError> {
        match *self {
            AdversaryTable::Golden(n) => {
                let rows = golden_rows(n);
                if json {
                    json_lines(&rows, w)?;
                } else {
                    write_golden_csv(&rows, &mut w)?;
                }
            }
            AdversaryTable::Wk(a, b) => {
                let rows = wk_rows(a, b)?;
                if json {
                    json_lines(&rows, w)?;
                } else {
                    write_wk_csv(&rows, &mut w)?;
                }
            }
        }
        Ok(())
    }
}

/// Error of an operation that can fail either on its input or on output.
#[derive(Debug, thiserror::Error)]
pub enum HarnessIoError {
    #[error(transparent)]
    Heap(#[from] HeapError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn json_lines<T: Serialize>(rows: &[T], mut w: impl Write) -> io::Result<()> {
    for r in rows {
        serde_json::to_writer(&mut w, r)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Parses and replays program text, returning the final heap and the total
/// comparisons.
pub fn replay_text(text: &str, strategy: Strategy) -> Result<(Tree<Key>, u64), ProgramError> {
    let p: Program<Key> = text.parse()?;
    if p.is_empty() {
        return Err(ProgramError::Empty);
    }
    let mut m = Melder::new(strategy);
    let t = replay(&p, &mut m)?;
    Ok((t, m.meter().comparisons()))
}

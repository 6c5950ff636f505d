//! Potential functions and the bounds they certify.
//!
//! A potential maps a heap to a real number; the amortized cost of an
//! operation is its actual comparison count plus the change in total
//! potential over the heaps it consumes and produces. The node-additive
//! potentials sum a term `phi(t, u)` over every node `(t a u)`:
//!
//! * `KsClamped`: `max(log_beta(beta * sz u / (sz t + sz u)), 0)`
//! * `KsUnclamped`: the same without the clamp
//! * `StIndicator`: `1` if `sz t < sz u`, else `0`
//!
//! with `beta = phi^(phi + 2)` and `phi` the golden ratio. `Rank` and
//! `MinorRank` are the rank and minor rank of the root.

use std::collections::{BinaryHeap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::LazyLock;

use crate::error::HeapError;
use crate::heap::Strategy;
use crate::ledger::OpKind;
use crate::measures::prank;
use crate::tree::{Node, Tree};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub phi: f64,
    pub beta: f64,
    pub alpha: f64,
    ln_phi: f64,
    ln_beta: f64,
    ln_alpha: f64,
}

impl Constants {
    fn new() -> Self {
        let phi = (5f64.sqrt() + 1.0) / 2.0;
        let beta = phi.powf(phi + 2.0);
        let alpha = phi.powf(2.0 * phi - 1.0);
        Constants {
            phi,
            beta,
            alpha,
            ln_phi: phi.ln(),
            ln_beta: beta.ln(),
            ln_alpha: alpha.ln(),
        }
    }

    pub fn log_phi(&self, x: f64) -> f64 {
        x.ln() / self.ln_phi
    }

    pub fn log_beta(&self, x: f64) -> f64 {
        x.ln() / self.ln_beta
    }

    pub fn log_alpha(&self, x: f64) -> f64 {
        x.ln() / self.ln_alpha
    }
}

pub static CONSTANTS: LazyLock<Constants> = LazyLock::new(Constants::new);

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Rank,
    MinorRank,
    KsClamped,
    KsUnclamped,
    StIndicator,
    /// `lambda * a + (1 - lambda) * b`; `a` and `b` are never convex themselves.
    Convex {
        lambda: f64,
        a: Box<PotentialKind>,
        b: Box<PotentialKind>,
    },
}

impl PotentialKind {
    pub fn convex(lambda: f64, a: PotentialKind, b: PotentialKind) -> Result<Self, HeapError> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(HeapError::Convex(format!("lambda {lambda} outside [0, 1]")));
        }
        if matches!(a, PotentialKind::Convex { .. }) || matches!(b, PotentialKind::Convex { .. }) {
            return Err(HeapError::Convex("nested combinations are not supported".into()));
        }
        Ok(PotentialKind::Convex { lambda, a: Box::new(a), b: Box::new(b) })
    }

    /// The rank / clamped-KS blend whose bounds interpolate between the
    /// `log2` and `log_phi` families.
    pub fn blend(lambda: f64) -> Result<Self, HeapError> {
        Self::convex(lambda, PotentialKind::Rank, PotentialKind::KsClamped)
    }

    /// `phi(t, u)` for the node-additive kinds, from the two `sz` values.
    pub fn node_term(&self, sz_t: u64, sz_u: u64) -> Option<f64> {
        let c = &*CONSTANTS;
        let (m, n) = (sz_t as f64, sz_u as f64);
        match self {
            PotentialKind::KsClamped => Some(c.log_beta(c.beta * n / (m + n)).max(0.0)),
            PotentialKind::KsUnclamped => Some(c.log_beta(c.beta * n / (m + n))),
            PotentialKind::StIndicator => Some(if sz_t < sz_u { 1.0 } else { 0.0 }),
            _ => None,
        }
    }

    fn is_node_additive(&self) -> bool {
        matches!(
            self,
            PotentialKind::KsClamped | PotentialKind::KsUnclamped | PotentialKind::StIndicator
        )
    }
}

impl fmt::Display for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::Rank => f.write_str("rank"),
            PotentialKind::MinorRank => f.write_str("prank"),
            PotentialKind::KsClamped => f.write_str("ks"),
            PotentialKind::KsUnclamped => f.write_str("ks-unclamped"),
            PotentialKind::StIndicator => f.write_str("st"),
            PotentialKind::Convex { lambda, a, b } => write!(f, "convex:{lambda}:{a}:{b}"),
        }
    }
}

impl FromStr for PotentialKind {
    type Err = HeapError;

    /// `rank`, `prank`, `ks`, `ks-unclamped`, `st`, `convex:LAMBDA`
    /// (rank blended with `ks`) or `convex:LAMBDA:A:B`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let simple = |s: &str| match s {
            "rank" => Ok(PotentialKind::Rank),
            "prank" | "minor-rank" => Ok(PotentialKind::MinorRank),
            "ks" | "ks-clamped" => Ok(PotentialKind::KsClamped),
            "ks-unclamped" => Ok(PotentialKind::KsUnclamped),
            "st" | "st-indicator" => Ok(PotentialKind::StIndicator),
            _ => Err(HeapError::UnsupportedPotential(s.to_string())),
        };
        match s.strip_prefix("convex:") {
            None => simple(s),
            Some(rest) => {
                let parts: Vec<&str> = rest.split(':').collect();
                let lambda: f64 = parts[0]
                    .parse()
                    .map_err(|_| HeapError::Convex(format!("bad lambda {:?}", parts[0])))?;
                match parts.len() {
                    1 => PotentialKind::blend(lambda),
                    3 => PotentialKind::convex(lambda, simple(parts[1])?, simple(parts[2])?),
                    _ => Err(HeapError::Convex(format!("cannot parse {s:?}"))),
                }
            }
        }
    }
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Sum {
    sum: f64,
    carry: f64,
}

impl Sum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn merge(&mut self, other: Sum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// `phi(t, u)` for the node-additive kinds; `None` for the others.
pub fn node_potential<K>(t: &Tree<K>, u: &Tree<K>, kind: &PotentialKind) -> Option<f64> {
    kind.node_term(t.sz(), u.sz())
}

fn node_term_of<K>(n: &Node<K>, kind: &PotentialKind) -> f64 {
    kind.node_term(n.left().sz(), n.right().sz())
        .expect("node-additive kind")
}

/// Total potential of one heap. Shared subtrees are summed once and reused.
pub fn potential<K>(x: &Tree<K>, kind: &PotentialKind) -> f64 {
    match kind {
        PotentialKind::Rank => x.rank() as f64,
        PotentialKind::MinorRank => prank(x) as f64,
        PotentialKind::Convex { lambda, a, b } => {
            lambda * potential(x, a) + (1.0 - lambda) * potential(x, b)
        }
        _ => node_sum(x, kind).value(),
    }
}

fn node_sum<K>(x: &Tree<K>, kind: &PotentialKind) -> Sum {
    enum Step<'a, K> {
        Enter(&'a Tree<K>),
        Exit(&'a Tree<K>),
    }
    let mut memo: HashMap<usize, Sum> = HashMap::new();
    let mut steps = vec![Step::Enter(x)];
    let mut values: Vec<Sum> = Vec::new();
    while let Some(step) = steps.pop() {
        match step {
            Step::Enter(t) => {
                let Some(n) = t.root() else {
                    values.push(Sum::default());
                    continue;
                };
                if let Some(s) = t.addr().and_then(|a| memo.get(&a)) {
                    values.push(*s);
                    continue;
                }
                steps.push(Step::Exit(t));
                steps.push(Step::Enter(n.right()));
                steps.push(Step::Enter(n.left()));
            }
            Step::Exit(t) => {
                let n = t.root().expect("exit of a node");
                let right = values.pop().expect("right value");
                let mut s = values.pop().expect("left value");
                s.merge(right);
                s.add(node_term_of(n, kind));
                if t.is_shared() {
                    memo.insert(t.addr().expect("node"), s);
                }
                values.push(s);
            }
        }
    }
    values.pop().expect("root value")
}

/// `sum(potential(after)) - sum(potential(before))`.
///
/// For node-additive kinds, subtrees that `before` and `after` share by
/// pointer cancel without being visited, so the cost is proportional to the
/// number of nodes that actually differ. Nodes are expanded largest first:
/// every ancestor of a shared subtree is strictly larger than it, so a
/// shared subtree is always pending on both sides before it is popped.
pub fn potential_delta<K>(before: &[&Tree<K>], after: &[&Tree<K>], kind: &PotentialKind) -> f64 {
    match kind {
        PotentialKind::Convex { lambda, a, b } => {
            lambda * potential_delta(before, after, a)
                + (1.0 - lambda) * potential_delta(before, after, b)
        }
        k if k.is_node_additive() => node_delta(before, after, kind),
        _ => {
            let total = |ts: &[&Tree<K>]| {
                let mut s = Sum::default();
                ts.iter().for_each(|t| s.add(potential(t, kind)));
                s.value()
            };
            total(after) - total(before)
        }
    }
}

struct Pending<'a, K> {
    node: &'a Node<K>,
    before: u64,
    after: u64,
}

fn node_delta<K>(before: &[&Tree<K>], after: &[&Tree<K>], kind: &PotentialKind) -> f64 {
    let mut pending: HashMap<usize, Pending<'_, K>> = HashMap::new();
    let mut order: BinaryHeap<(u64, usize)> = BinaryHeap::new();

    fn push<'a, K>(
        pending: &mut HashMap<usize, Pending<'a, K>>,
        order: &mut BinaryHeap<(u64, usize)>,
        t: &'a Tree<K>,
        is_after: bool,
        count: u64,
    ) {
        let (Some(node), Some(addr)) = (t.root(), t.addr()) else { return };
        let entry = pending.entry(addr).or_insert_with(|| {
            order.push((node.size(), addr));
            Pending { node, before: 0, after: 0 }
        });
        if is_after {
            entry.after += count;
        } else {
            entry.before += count;
        }
    }

    for t in before {
        push(&mut pending, &mut order, t, false, 1);
    }
    for t in after {
        push(&mut pending, &mut order, t, true, 1);
    }
    let mut gained = Sum::default();
    let mut lost = Sum::default();
    while let Some((_, addr)) = order.pop() {
        let p = pending.remove(&addr).expect("queued node is pending");
        let common = p.before.min(p.after);
        let term = node_term_of(p.node, kind);
        for (count, is_after) in [(p.before - common, false), (p.after - common, true)] {
            if count == 0 {
                continue;
            }
            let acc = if is_after { &mut gained } else { &mut lost };
            acc.add(term * count as f64);
            push(&mut pending, &mut order, p.node.left(), is_after, count);
            push(&mut pending, &mut order, p.node.right(), is_after, count);
        }
    }
    gained.value() - lost.value()
}

/// The proven per-operation amortized bound for `op` under `kind` and
/// `strategy`, or `None` when there is none.
///
/// `sz_in` holds the `sz` of each consumed heap and `sz_out` that of the
/// produced heap.
pub fn bound_for(
    op: OpKind,
    sz_in: &[u64],
    sz_out: u64,
    kind: &PotentialKind,
    strategy: Strategy,
) -> Option<f64> {
    let c = &*CONSTANTS;
    match (op, kind) {
        (OpKind::Union | OpKind::DelMin, PotentialKind::Convex { lambda, a, b }) => {
            let ba = bound_for(op, sz_in, sz_out, a, strategy)?;
            let bb = bound_for(op, sz_in, sz_out, b, strategy)?;
            Some(lambda * ba + (1.0 - lambda) * bb)
        }
        (OpKind::Union, PotentialKind::Rank) if strategy.is_leftist() => {
            Some((sz_out as f64).log2())
        }
        (OpKind::DelMin, PotentialKind::Rank) if strategy.is_leftist() => {
            Some(2.0 * (*sz_in.first()? as f64).log2())
        }
        (OpKind::Union, PotentialKind::KsClamped) if strategy == Strategy::WeightBiased => {
            Some(c.log_phi(sz_in.iter().sum::<u64>() as f64))
        }
        (OpKind::DelMin, PotentialKind::KsClamped) if strategy == Strategy::WeightBiased => {
            Some(c.log_phi(*sz_in.first()? as f64))
        }
        _ => None,
    }
}

/// `rhs - lhs` of `log_beta(beta n / (m + n)) <= log_alpha((m + n) / m)`.
pub fn ks_inequality_slack(m: u64, n: u64) -> f64 {
    let c = &*CONSTANTS;
    let (m, n) = (m as f64, n as f64);
    c.log_alpha((m + n) / m) - c.log_beta(c.beta * n / (m + n))
}

/// The two-sided logarithmic inequality behind the meld bound, with
/// tolerance `1e-12`. Both arguments must be positive.
pub fn check_ks_inequality(m: u64, n: u64) -> bool {
    assert!(m >= 1 && n >= 1, "positive arguments required");
    ks_inequality_slack(m, n) >= -1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heap::Melder;

    fn t(s: &str) -> Tree<i64> {
        s.parse().unwrap()
    }

    #[test]
    fn constants() {
        let c = &*CONSTANTS;
        assert!((c.phi * c.phi - c.phi - 1.0).abs() < 1e-12);
        assert!((c.log_alpha(c.phi) + 2.0 * c.log_beta(c.phi) - 1.0).abs() < 1e-12);
        assert!((c.beta - 5.703).abs() < 1e-3);
        assert!((c.alpha - 2.933).abs() < 1e-3);
    }

    #[test]
    fn node_terms() {
        let c = &*CONSTANTS;
        let equal = PotentialKind::KsClamped.node_term(5, 5).unwrap();
        assert!((equal - (1.0 - c.log_beta(2.0))).abs() < 1e-12);
        assert!((equal - 0.6019).abs() < 1e-4);
        // log_beta(beta n / (m + n)) = 0 exactly when m = (beta - 1) n
        let n = 1000u64;
        let m = ((c.beta - 1.0) * n as f64).ceil() as u64 + 1;
        assert_eq!(PotentialKind::KsClamped.node_term(m, n), Some(0.0));
        assert!(PotentialKind::KsUnclamped.node_term(m, n).unwrap() < 0.0);
        let single = Tree::single(1);
        assert_eq!(
            node_potential(&single, &Tree::empty(), &PotentialKind::StIndicator),
            Some(0.0)
        );
        assert_eq!(node_potential(&single, &Tree::empty(), &PotentialKind::Rank), None);
    }

    #[test]
    fn potentials_of_small_trees() {
        let e: Tree<i64> = Tree::empty();
        for k in ["rank", "prank", "ks", "ks-unclamped", "st", "convex:0.3"] {
            let kind: PotentialKind = k.parse().unwrap();
            assert_eq!(potential(&e, &kind), 0.0);
        }
        let single = potential(&Tree::single(4), &PotentialKind::KsClamped);
        assert!((single - (1.0 - CONSTANTS.log_beta(2.0))).abs() < 1e-12);
        let x = t("((() 2 ()) 1 (() 3 ()))");
        assert_eq!(potential(&x, &PotentialKind::Rank), 2.0);
        assert_eq!(potential(&x, &PotentialKind::MinorRank), 2.0);
        let blend = PotentialKind::blend(0.25).unwrap();
        let expect =
            0.25 * 2.0 + 0.75 * potential(&x, &PotentialKind::KsClamped);
        assert!((potential(&x, &blend) - expect).abs() < 1e-12);
    }

    #[test]
    fn convex_rejects_nesting() {
        let inner = PotentialKind::blend(0.5).unwrap();
        assert!(PotentialKind::convex(0.5, inner, PotentialKind::Rank).is_err());
        assert!(PotentialKind::blend(1.5).is_err());
        assert!("convex:0.5:rank:st".parse::<PotentialKind>().is_ok());
        assert!("convex:x".parse::<PotentialKind>().is_err());
    }

    #[test]
    fn delta_matches_full_recomputation() {
        let mut m = Melder::new(Strategy::WeightBiased);
        let mut x = Tree::empty();
        let mut y = Tree::empty();
        for k in 0..200i64 {
            x = m.insert((k * 37) % 101, &x);
            y = m.insert((k * 53) % 97, &y);
        }
        let z = m.union(&x, &y);
        for kind in ["ks", "ks-unclamped", "st", "rank", "convex:0.5"] {
            let kind: PotentialKind = kind.parse().unwrap();
            let full = potential(&z, &kind) - potential(&x, &kind) - potential(&y, &kind);
            let fast = potential_delta(&[&x, &y], &[&z], &kind);
            assert!((full - fast).abs() < 1e-9, "{kind}: {full} vs {fast}");
        }
    }

    #[test]
    fn delta_handles_repeated_trees() {
        let x = t("((() 2 ()) 1 (() 3 ()))");
        let kind = PotentialKind::KsUnclamped;
        assert_eq!(potential_delta(&[&x, &x], &[&x], &kind), -potential(&x, &kind));
        assert_eq!(potential_delta(&[&x], &[&x], &kind), 0.0);
    }

    #[test]
    fn bounds() {
        let rank = PotentialKind::Rank;
        let ks = PotentialKind::KsClamped;
        let w = Strategy::WeightBiased;
        assert_eq!(bound_for(OpKind::Union, &[8, 9], 16, &rank, w), Some(4.0));
        assert_eq!(bound_for(OpKind::Union, &[8, 9], 16, &rank, Strategy::Skew), None);
        let d = bound_for(OpKind::DelMin, &[10], 9, &ks, w).unwrap();
        assert!((d - 4.785).abs() < 1e-3);
        assert_eq!(bound_for(OpKind::DelMin, &[10], 9, &ks, Strategy::RankBiased), None);
        let endpoint = PotentialKind::blend(1.0).unwrap();
        assert_eq!(
            bound_for(OpKind::DelMin, &[10], 9, &endpoint, w),
            bound_for(OpKind::DelMin, &[10], 9, &rank, w)
        );
        assert_eq!(bound_for(OpKind::Single, &[], 2, &rank, w), None);
    }

    #[test]
    fn ks_inequality_points() {
        assert!(check_ks_inequality(1, 1));
        assert!(check_ks_inequality(1_000_000, 1));
        assert!(check_ks_inequality(1, 1_000_000));
        let c = &*CONSTANTS;
        let s = ks_inequality_slack(1, 1);
        assert!((s - (c.log_alpha(2.0) - (1.0 - c.log_beta(2.0)))).abs() < 1e-12);
    }
}

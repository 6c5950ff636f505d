//! The meld kernel, balancing strategies and comparison counting.
//!
//! All four heap flavors use the same meld:
//!
//! ```text
//! meld () ()          = ()
//! meld (t a u) y      = bal (t a (meld u y))   if a <= min y
//! meld x (t a u)      = bal (t a (meld x u))   otherwise
//! ```
//!
//! Every unfolding of a pair that is not both empty costs exactly one
//! comparison (comparisons against the top element included), so a meld of
//! `x` and `y` costs `rank x + rank y`. The kernel runs in two phases: it
//! walks both right spines into an explicit path, then applies `bal` bottom
//! up. This performs the same comparisons and the same `bal` calls, in the
//! same order, as the recursive definition.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::HeapError;
use crate::tree::{ExtendedKey, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Strategy {
    /// Always swap.
    Skew,
    /// Keep iff `size t > size u`.
    WeightBiased,
    /// Keep iff `rank t > rank u`.
    RankBiased,
    /// Swap with probability `p`, drawn from a ChaCha stream seeded by `seed`.
    Randomized { p: f64, seed: u64 },
}

impl Strategy {
    pub fn randomized(p: f64, seed: u64) -> Result<Self, HeapError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(HeapError::Probability(p.to_string()));
        }
        Ok(Strategy::Randomized { p, seed })
    }

    /// True for the two flavors that maintain a leftist condition.
    pub fn is_leftist(&self) -> bool {
        matches!(self, Strategy::WeightBiased | Strategy::RankBiased)
    }

    /// Same strategy with a different seed (no-op unless randomized).
    pub fn reseeded(self, seed: u64) -> Self {
        match self {
            Strategy::Randomized { p, .. } => Strategy::Randomized { p, seed },
            s => s,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Skew => f.write_str("skew"),
            Strategy::WeightBiased => f.write_str("weight"),
            Strategy::RankBiased => f.write_str("rank"),
            Strategy::Randomized { p, seed } => write!(f, "randomized:{p}:{seed}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = HeapError;

    /// Accepts `skew`, `weight`, `rank`, `randomized:P` and `randomized:P:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "skew" => Ok(Strategy::Skew),
            "weight" | "weight-biased" => Ok(Strategy::WeightBiased),
            "rank" | "rank-biased" => Ok(Strategy::RankBiased),
            _ => {
                let rest = s
                    .strip_prefix("randomized:")
                    .ok_or_else(|| HeapError::Probability(format!("unknown strategy {s:?}")))?;
                let mut parts = rest.splitn(2, ':');
                let p = parts
                    .next()
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| HeapError::Probability(rest.to_string()))?;
                let seed = match parts.next() {
                    Some(seed) => seed
                        .parse()
                        .map_err(|_| HeapError::Probability(format!("bad seed {seed:?}")))?,
                    None => 0,
                };
                Strategy::randomized(p, seed)
            }
        }
    }
}

/// What the leftist strategies do when sizes (or ranks) are equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Swap on ties. Golden-tree self-recreation and heap reachability
    /// both depend on this.
    #[default]
    Swap,
    /// Keep on ties. Only useful as a negative control.
    Keep,
}

/// Comparison counter for meld.
///
/// `comparisons` is the cost measure: one per unfolding of meld, including
/// comparisons against the top element. `structural` counts size/rank tests
/// and random draws made by `bal`; it is never added to `comparisons`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CostMeter {
    comparisons: u64,
    structural: u64,
}

impl CostMeter {
    pub fn comparisons(&self) -> u64 {
        self.comparisons
    }

    pub fn structural(&self) -> u64 {
        self.structural
    }

    pub fn reset(&mut self) {
        *self = CostMeter::default();
    }
}

/// Runs heap operations under one strategy, metering every comparison.
#[derive(Debug, Clone)]
pub struct Melder {
    strategy: Strategy,
    tie_break: TieBreak,
    meter: CostMeter,
    rng: Option<ChaCha8Rng>,
    draws: u64,
}

impl Melder {
    /// # Panics
    ///
    /// If a randomized strategy carries a probability outside `[0, 1]`; use
    /// [`Strategy::randomized`] to check it up front.
    pub fn new(strategy: Strategy) -> Self {
        let rng = match strategy {
            Strategy::Randomized { p, seed } => {
                assert!((0.0..=1.0).contains(&p), "swap probability {p} outside [0, 1]");
                Some(ChaCha8Rng::seed_from_u64(seed))
            }
            _ => None,
        };
        Melder {
            strategy,
            tie_break: TieBreak::Swap,
            meter: CostMeter::default(),
            rng,
            draws: 0,
        }
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    /// An independent random stream for parallel trials. Deterministic
    /// strategies are unaffected.
    pub fn fork(&self, stream: u64) -> Melder {
        let mut m = Melder::new(self.strategy).with_tie_break(self.tie_break);
        if let Some(rng) = m.rng.as_mut() {
            rng.set_stream(stream);
        }
        m
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn tie_break(&self) -> TieBreak {
        self.tie_break
    }

    pub fn meter(&self) -> &CostMeter {
        &self.meter
    }

    pub fn reset_meter(&mut self) {
        self.meter.reset();
    }

    /// Random draws consumed so far.
    pub fn draws(&self) -> u64 {
        self.draws
    }

    /// Comparisons charged by `f`, leaving the running total intact.
    pub fn measure<R>(&mut self, f: impl FnOnce(&mut Melder) -> R) -> (R, u64) {
        let before = self.meter.comparisons;
        let r = f(self);
        (r, self.meter.comparisons - before)
    }

    fn should_swap<K>(&mut self, t: &Tree<K>, u: &Tree<K>) -> bool {
        let ordering = match self.strategy {
            Strategy::Skew => return true,
            Strategy::WeightBiased => t.size().cmp(&u.size()),
            Strategy::RankBiased => t.rank().cmp(&u.rank()),
            Strategy::Randomized { p, .. } => {
                self.meter.structural += 1;
                self.draws += 1;
                let rng = self.rng.as_mut().expect("randomized melder owns a stream");
                return rng.gen_bool(p);
            }
        };
        self.meter.structural += 1;
        match self.tie_break {
            TieBreak::Swap => ordering.is_le(),
            TieBreak::Keep => ordering.is_lt(),
        }
    }

    /// Balancing step: builds `(t a u)` or `(u a t)` per the strategy.
    pub fn bal<K>(&mut self, t: Tree<K>, a: K, u: Tree<K>) -> Tree<K> {
        if self.should_swap(&t, &u) {
            Tree::node(u, a, t)
        } else {
            Tree::node(t, a, u)
        }
    }

    pub fn union<K: Ord + Clone>(&mut self, x: &Tree<K>, y: &Tree<K>) -> Tree<K> {
        let mut path: Vec<(Tree<K>, K)> = Vec::with_capacity((x.rank() + y.rank()) as usize);
        let mut x = x.clone();
        let mut y = y.clone();
        loop {
            let take_x = match (x.root(), y.root()) {
                (None, None) => break,
                (Some(nx), _) => ExtendedKey::Key(nx.key()) <= y.min(),
                (None, Some(_)) => false,
            };
            self.meter.comparisons += 1;
            let side = if take_x { &mut x } else { &mut y };
            let (left, key, right) = {
                let n = side.root().expect("chosen side is non-empty");
                (n.left().clone(), n.key().clone(), n.right().clone())
            };
            path.push((left, key));
            *side = right;
        }
        let mut acc = Tree::empty();
        for (left, key) in path.into_iter().rev() {
            acc = self.bal(left, key, acc);
        }
        acc
    }

    /// Alias for [`Melder::union`].
    pub fn meld<K: Ord + Clone>(&mut self, x: &Tree<K>, y: &Tree<K>) -> Tree<K> {
        self.union(x, y)
    }

    /// `union(single(a), x)`.
    pub fn insert<K: Ord + Clone>(&mut self, a: K, x: &Tree<K>) -> Tree<K> {
        self.union(&Tree::single(a), x)
    }

    pub fn del_min<K: Ord + Clone>(&mut self, x: &Tree<K>) -> Result<Tree<K>, HeapError> {
        let n = x.root().ok_or(HeapError::EmptyHeap)?;
        Ok(self.union(n.left(), n.right()))
    }

    /// Removes and returns the minimum along with the remaining heap.
    pub fn pop<K: Ord + Clone>(&mut self, x: &Tree<K>) -> Option<(K, Tree<K>)> {
        let n = x.root()?;
        Some((n.key().clone(), self.union(n.left(), n.right())))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    HeapOrder,
    SizeCache { cached: u64, expected: u64 },
    RankCache { cached: u32, expected: u32 },
    WeightBiased { left: u64, right: u64 },
    RankBiased { left: u32, right: u32 },
}

/// A broken invariant at the node reached by `path` (`L`/`R` steps from the root).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.path.is_empty() { "root" } else { &self.path };
        match &self.kind {
            ViolationKind::HeapOrder => write!(f, "heap order broken at {at}"),
            ViolationKind::SizeCache { cached, expected } => {
                write!(f, "size cache {cached} != {expected} at {at}")
            }
            ViolationKind::RankCache { cached, expected } => {
                write!(f, "rank cache {cached} != {expected} at {at}")
            }
            ViolationKind::WeightBiased { left, right } => {
                write!(f, "weight violation at {at}: size left {left} < size right {right}")
            }
            ViolationKind::RankBiased { left, right } => {
                write!(f, "rank violation at {at}: rank left {left} < rank right {right}")
            }
        }
    }
}

/// All violations of the heap property, cache consistency and the
/// strategy's leftist condition. Empty means valid.
///
/// Subtrees shared inside `x` are checked once.
pub fn validate<K: Ord>(x: &Tree<K>, strategy: Strategy) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: HashSet<usize> = HashSet::new();
    let mut path: Vec<u8> = Vec::new();
    // (tree, depth, step taken to reach it)
    let mut stack: Vec<(&Tree<K>, usize, u8)> = vec![(x, 0, 0)];
    while let Some((t, depth, step)) = stack.pop() {
        path.truncate(depth.saturating_sub(1));
        if depth > 0 {
            path.push(step);
        }
        let Some(n) = t.root() else { continue };
        if t.is_shared() && !seen.insert(t.addr().expect("non-empty")) {
            continue;
        }
        let here = || String::from_utf8(path.clone()).expect("ascii path");
        let (l, r) = (n.left(), n.right());
        let ordered = |c: &Tree<K>| c.root().is_none_or(|c| n.key() <= c.key());
        if !ordered(l) || !ordered(r) {
            out.push(Violation { path: here(), kind: ViolationKind::HeapOrder });
        }
        let expected = l.size() + r.size() + 1;
        if n.size() != expected {
            out.push(Violation {
                path: here(),
                kind: ViolationKind::SizeCache { cached: n.size(), expected },
            });
        }
        if n.rank() != r.rank() + 1 {
            out.push(Violation {
                path: here(),
                kind: ViolationKind::RankCache { cached: n.rank(), expected: r.rank() + 1 },
            });
        }
        match strategy {
            Strategy::WeightBiased if l.size() < r.size() => out.push(Violation {
                path: here(),
                kind: ViolationKind::WeightBiased { left: l.size(), right: r.size() },
            }),
            Strategy::RankBiased if l.rank() < r.rank() => out.push(Violation {
                path: here(),
                kind: ViolationKind::RankBiased { left: l.rank(), right: r.rank() },
            }),
            _ => {}
        }
        stack.push((r, depth + 1, b'R'));
        stack.push((l, depth + 1, b'L'));
    }
    out
}

/// [`validate`] as a `Result`, reporting the first violation.
pub fn ensure_valid<K: Ord>(x: &Tree<K>, strategy: Strategy) -> Result<(), HeapError> {
    match validate(x, strategy).into_iter().next() {
        None => Ok(()),
        Some(v) => Err(HeapError::Invalid {
            strategy: strategy.to_string(),
            first: v.to_string(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree<i64> {
        s.parse().unwrap()
    }

    const ALL: [Strategy; 4] = [
        Strategy::Skew,
        Strategy::WeightBiased,
        Strategy::RankBiased,
        Strategy::Randomized { p: 0.5, seed: 3 },
    ];

    #[test]
    fn union_of_empties_is_free() {
        for s in ALL {
            let mut m = Melder::new(s);
            assert!(m.union::<i64>(&Tree::empty(), &Tree::empty()).is_empty());
            assert_eq!(m.meter().comparisons(), 0);
        }
    }

    #[test]
    fn skew_union_of_singletons() {
        let mut m = Melder::new(Strategy::Skew);
        let z = m.union(&Tree::single(1), &Tree::single(2));
        assert_eq!(z.to_string(), "((() 2 ()) 1 ())");
        assert_eq!(m.meter().comparisons(), 2);

        let mut m = Melder::new(Strategy::Skew);
        assert_eq!(m.insert(1, &Tree::single(2)), z);
        assert_eq!(m.meter().comparisons(), 2);
    }

    #[test]
    fn insert_into_empty_costs_one() {
        for s in ALL {
            let mut m = Melder::new(s);
            assert_eq!(m.insert(5, &Tree::empty()).to_string(), "(() 5 ())");
            assert_eq!(m.meter().comparisons(), 1);
        }
    }

    #[test]
    fn bal_examples() {
        let mut m = Melder::new(Strategy::WeightBiased);
        assert_eq!(m.bal(Tree::empty(), 1, Tree::single(2)).to_string(), "((() 2 ()) 1 ())");
        let mut m = Melder::new(Strategy::RankBiased);
        assert_eq!(
            m.bal(Tree::single(2), 1, Tree::single(3)).to_string(),
            "((() 3 ()) 1 (() 2 ()))"
        );
        let mut m = Melder::new(Strategy::RankBiased).with_tie_break(TieBreak::Keep);
        assert_eq!(
            m.bal(Tree::single(2), 1, Tree::single(3)).to_string(),
            "((() 2 ()) 1 (() 3 ()))"
        );
        let mut m = Melder::new(Strategy::Randomized { p: 1.0, seed: 9 });
        for _ in 0..100 {
            assert_eq!(
                m.bal(t("((() 5 ()) 4 ())"), 1, Tree::single(3)).to_string(),
                "((() 3 ()) 1 ((() 5 ()) 4 ()))"
            );
        }
        assert_eq!(m.meter().comparisons(), 0);
        assert_eq!(m.meter().structural(), 100);
    }

    #[test]
    fn del_min_costs() {
        let mut m = Melder::new(Strategy::Skew);
        assert!(m.del_min(&Tree::single(9)).unwrap().is_empty());
        assert_eq!(m.meter().comparisons(), 0);
        let z = m.del_min(&t("((() 2 ()) 1 ())")).unwrap();
        assert_eq!(z.to_string(), "(() 2 ())");
        assert_eq!(m.meter().comparisons(), 1);
        assert_eq!(m.del_min::<i64>(&Tree::empty()), Err(HeapError::EmptyHeap));
    }

    /// Ordered by the number only.
    #[derive(Clone, Debug)]
    struct Tagged(i64, char);

    impl PartialEq for Tagged {
        fn eq(&self, other: &Self) -> bool {
            self.0 == other.0
        }
    }
    impl Eq for Tagged {}
    impl PartialOrd for Tagged {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Tagged {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.0.cmp(&other.0)
        }
    }

    #[test]
    fn duplicates_prefer_first_argument() {
        let mut m = Melder::new(Strategy::Skew);
        let z = m.union(&Tree::single(Tagged(1, 'x')), &Tree::single(Tagged(1, 'y')));
        assert_eq!(z.root().unwrap().key().1, 'x');
        let z = m.union(&Tree::single(Tagged(1, 'y')), &Tree::single(Tagged(1, 'x')));
        assert_eq!(z.root().unwrap().key().1, 'y');
    }

    #[test]
    fn validate_examples() {
        for s in ALL {
            assert!(validate::<i64>(&Tree::empty(), s).is_empty());
        }
        let v = validate(&t("(() 3 (() 5 ()))"), Strategy::WeightBiased);
        assert_eq!(
            v,
            vec![Violation {
                path: String::new(),
                kind: ViolationKind::WeightBiased { left: 0, right: 1 }
            }]
        );
        assert!(validate(&t("(() 3 (() 5 ()))"), Strategy::Skew).is_empty());
        let v = validate(&t("((() 1 ()) 3 ())"), Strategy::Skew);
        assert_eq!(v[0].kind, ViolationKind::HeapOrder);
        let v = validate(&t("((() 1 ()) 0 ((() 4 ()) 2 (() 3 ())))"), Strategy::RankBiased);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "");
        assert!(ensure_valid(&t("(() 3 (() 5 ()))"), Strategy::RankBiased).is_err());
    }

    #[test]
    fn strategy_text() {
        assert_eq!("skew".parse::<Strategy>().unwrap(), Strategy::Skew);
        assert_eq!("weight".parse::<Strategy>().unwrap(), Strategy::WeightBiased);
        assert_eq!("rank-biased".parse::<Strategy>().unwrap(), Strategy::RankBiased);
        assert_eq!(
            "randomized:0.5:7".parse::<Strategy>().unwrap(),
            Strategy::Randomized { p: 0.5, seed: 7 }
        );
        assert!("randomized:1.5".parse::<Strategy>().is_err());
        assert!("pairing".parse::<Strategy>().is_err());
        assert!(Strategy::randomized(-0.1, 0).is_err());
    }

    #[test]
    fn randomized_runs_replay_from_seed() {
        let keys: Vec<i64> = (0..500).map(|i| (i * 7919) % 500).collect();
        let run = |seed| {
            let mut m = Melder::new(Strategy::Randomized { p: 0.5, seed });
            let h = keys.iter().fold(Tree::empty(), |h, &k| m.insert(k, &h));
            (h.to_string(), m.meter().comparisons(), m.draws())
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11).0, run(12).0);
    }
}

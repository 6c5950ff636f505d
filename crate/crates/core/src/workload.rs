//! Seeded random workloads, compiled to heap programs.
//!
//! A workload keeps a fixed number of heap slots. Each operation is drawn
//! from the op mix:
//!
//! * insert: `SINGLE` a fresh key, then `UNION` it into a random slot;
//! * union: `UNION` two distinct slots into the first, refill the second
//!   with `EMPTY`;
//! * del_min: `DELMIN` a random non-empty slot (an insert if all are empty).
//!
//! The program depends only on the spec, never on the strategy, so the
//! same workload can be replayed under every strategy and compared.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::HeapError;
use crate::heap::{Melder, Strategy};
use crate::reachability::{Instr, Program, Reg};
use crate::tree::Tree;
use crate::Key;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OpMix {
    pub insert: f64,
    pub union: f64,
    pub del_min: f64,
}

impl Default for OpMix {
    fn default() -> Self {
        OpMix { insert: 0.5, union: 0.2, del_min: 0.3 }
    }
}

impl fmt::Display for OpMix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.insert, self.union, self.del_min)
    }
}

/// `INSERT:UNION:DELMIN`, e.g. `0.5:0.2:0.3`.
impl FromStr for OpMix {
    type Err = HeapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|w| w.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| HeapError::Workload(format!("op mix {s:?}: {e}")))?;
        match parts[..] {
            [insert, union, del_min] => Ok(OpMix { insert, union, del_min }),
            _ => Err(HeapError::Workload(format!("op mix {s:?} needs three weights"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KeyDist {
    /// Uniform over `lo..=hi`, duplicates allowed.
    Uniform { lo: Key, hi: Key },
    /// A random permutation of `0..n_ops`, one key per insert.
    Permutation,
}

impl Default for KeyDist {
    fn default() -> Self {
        KeyDist::Permutation
    }
}

impl fmt::Display for KeyDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KeyDist::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            KeyDist::Permutation => f.write_str("permutation"),
        }
    }
}

/// `permutation` or `uniform:LO:HI`.
impl FromStr for KeyDist {
    type Err = HeapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HeapError::Workload(format!("key distribution {s:?}"));
        if s == "permutation" {
            return Ok(KeyDist::Permutation);
        }
        let rest = s.strip_prefix("uniform:").ok_or_else(bad)?;
        let (lo, hi) = rest.split_once(':').ok_or_else(bad)?;
        Ok(KeyDist::Uniform {
            lo: lo.parse().map_err(|_| bad())?,
            hi: hi.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorkloadSpec {
    #[serde(serialize_with = "as_text")]
    pub strategy: Strategy,
    pub mix: OpMix,
    pub n_ops: usize,
    pub keys: KeyDist,
    /// Number of heap slots.
    pub heaps: usize,
    pub seed: u64,
}

fn as_text<S: serde::Serializer>(s: &Strategy, ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_str(s)
}

impl WorkloadSpec {
    pub fn new(strategy: Strategy, n_ops: usize, seed: u64) -> Self {
        WorkloadSpec {
            strategy,
            mix: OpMix::default(),
            n_ops,
            keys: KeyDist::default(),
            heaps: 8,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), HeapError> {
        let w = [self.mix.insert, self.mix.union, self.mix.del_min];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(HeapError::Workload(format!("negative or non-finite weight in {}", self.mix)));
        }
        if w.iter().all(|x| *x == 0.0) {
            return Err(HeapError::Workload("all op weights are zero".into()));
        }
        if self.heaps == 0 {
            return Err(HeapError::Workload("need at least one heap slot".into()));
        }
        if let KeyDist::Uniform { lo, hi } = self.keys {
            if lo > hi {
                return Err(HeapError::Workload(format!("empty key range {lo}..={hi}")));
            }
        }
        Ok(())
    }

    /// The workload as a program. Deterministic in the spec.
    pub fn program(&self) -> Result<Program<Key>, HeapError> {
        self.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let pick = WeightedIndex::new([self.mix.insert, self.mix.union, self.mix.del_min])
            .map_err(|e| HeapError::Workload(e.to_string()))?;
        let mut perm: Vec<Key> = Vec::new();
        if self.keys == KeyDist::Permutation {
            perm = (0..self.n_ops as Key).collect();
            perm.shuffle(&mut rng);
        }
        let mut next_key = perm.into_iter();

        let mut prog = Program::default();
        let mut next = 0u32;
        let mut fresh = || {
            next += 1;
            Reg(next - 1)
        };
        let mut slots: Vec<(Reg, u64)> = Vec::with_capacity(self.heaps);
        for _ in 0..self.heaps {
            let dst = fresh();
            prog.push(Instr::MakeEmpty { dst });
            slots.push((dst, 0));
        }

        for _ in 0..self.n_ops {
            let mut op = pick.sample(&mut rng);
            if op == 1 && self.heaps < 2 {
                op = 0;
            }
            if op == 2 && slots.iter().all(|s| s.1 == 0) {
                op = 0;
            }
            match op {
                0 => {
                    let key = match self.keys {
                        KeyDist::Uniform { lo, hi } => rng.gen_range(lo..=hi),
                        KeyDist::Permutation => next_key.next().expect("one key per op"),
                    };
                    let i = rng.gen_range(0..self.heaps);
                    let single = fresh();
                    prog.push(Instr::MakeSingle { dst: single, key });
                    let dst = fresh();
                    prog.push(Instr::Union { dst, a: slots[i].0, b: single });
                    slots[i] = (dst, slots[i].1 + 1);
                }
                1 => {
                    let i = rng.gen_range(0..self.heaps);
                    let j = (i + rng.gen_range(1..self.heaps)) % self.heaps;
                    let dst = fresh();
                    prog.push(Instr::Union { dst, a: slots[i].0, b: slots[j].0 });
                    slots[i] = (dst, slots[i].1 + slots[j].1);
                    let e = fresh();
                    prog.push(Instr::MakeEmpty { dst: e });
                    slots[j] = (e, 0);
                }
                _ => {
                    let nonempty: Vec<usize> = (0..self.heaps).filter(|&i| slots[i].1 > 0).collect();
                    let i = *nonempty.choose(&mut rng).expect("some slot is non-empty");
                    let dst = fresh();
                    prog.push(Instr::DelMin { dst, src: slots[i].0 });
                    slots[i] = (dst, slots[i].1 - 1);
                }
            }
        }
        Ok(prog)
    }
}

/// A heap of `n` keys drawn uniformly from `0..key_range`, built by
/// melding singletons in random pairs until one heap is left.
pub fn random_heap(melder: &mut Melder, rng: &mut impl Rng, n: usize, key_range: Key) -> Tree<Key> {
    let mut parts: Vec<Tree<Key>> = (0..n).map(|_| Tree::single(rng.gen_range(0..key_range))).collect();
    while parts.len() > 1 {
        let i = rng.gen_range(0..parts.len());
        let a = parts.swap_remove(i);
        let j = rng.gen_range(0..parts.len());
        parts[j] = melder.union(&a, &parts[j]);
    }
    parts.pop().unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heap::validate;
    use crate::reachability::replay;

    #[test]
    fn random_heaps_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in [Strategy::WeightBiased, Strategy::RankBiased] {
            let mut m = Melder::new(s);
            for n in [0, 1, 2, 17, 300] {
                let h = random_heap(&mut m, &mut rng, n, 50);
                assert_eq!(h.size(), n as u64);
                assert!(validate(&h, s).is_empty());
            }
        }
    }

    #[test]
    fn deterministic_and_strategy_independent() {
        let a = WorkloadSpec::new(Strategy::Skew, 500, 7).program().unwrap();
        let b = WorkloadSpec::new(Strategy::RankBiased, 500, 7).program().unwrap();
        assert_eq!(a.to_string(), b.to_string());
        assert!(a.check_linear().is_ok());
        let c = WorkloadSpec::new(Strategy::Skew, 500, 8).program().unwrap();
        assert_ne!(a.to_string(), c.to_string());
    }

    #[test]
    fn replays_under_every_strategy() {
        let mut spec = WorkloadSpec::new(Strategy::WeightBiased, 2000, 3);
        spec.keys = KeyDist::Uniform { lo: 0, hi: 9 };
        let p = spec.program().unwrap();
        for s in ["skew", "weight", "rank", "randomized:0.5:1"] {
            let mut m = Melder::new(s.parse().unwrap());
            assert!(replay(&p, &mut m).is_ok(), "{s}");
        }
    }

    #[test]
    fn rejects_bad_specs() {
        let mut spec = WorkloadSpec::new(Strategy::Skew, 10, 1);
        spec.mix = OpMix { insert: 0.0, union: 0.0, del_min: 0.0 };
        assert!(spec.program().is_err());
        spec.mix = OpMix { insert: -1.0, union: 1.0, del_min: 0.0 };
        assert!(spec.validate().is_err());
        spec.mix = OpMix::default();
        spec.keys = KeyDist::Uniform { lo: 5, hi: 4 };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn text_forms() {
        assert_eq!("0.5:0.2:0.3".parse::<OpMix>().unwrap(), OpMix::default());
        assert!("1:2".parse::<OpMix>().is_err());
        assert_eq!("uniform:-3:3".parse::<KeyDist>().unwrap(), KeyDist::Uniform { lo: -3, hi: 3 });
        assert_eq!("permutation".parse::<KeyDist>().unwrap(), KeyDist::Permutation);
        assert!("gauss".parse::<KeyDist>().is_err());
    }
}

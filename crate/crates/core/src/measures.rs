//! Structural measures: rank, minor rank, size and `sz`, and the laws that
//! relate them across a rank-biased meld.

use serde::Serialize;

use crate::heap::{Melder, Strategy};
use crate::potentials::CONSTANTS;
use crate::tree::Tree;

pub fn rank<K>(x: &Tree<K>) -> u32 {
    x.rank()
}

/// Minor rank: `0` for the empty tree, else `rank(left) + 1`.
pub fn prank<K>(x: &Tree<K>) -> u32 {
    x.left().map_or(0, |l| l.rank() + 1)
}

pub fn size<K>(x: &Tree<K>) -> u64 {
    x.size()
}

pub fn sz<K>(x: &Tree<K>) -> u64 {
    x.sz()
}

/// Walks the rightmost path without consulting the cache.
pub fn recompute_rank<K>(x: &Tree<K>) -> u32 {
    let mut n = 0;
    let mut t = x;
    while let Some(node) = t.root() {
        n += 1;
        t = node.right();
    }
    n
}

/// Counts nodes without consulting the cache.
pub fn recompute_size<K>(x: &Tree<K>) -> u64 {
    let mut n = 0;
    let mut stack = vec![x];
    while let Some(t) = stack.pop() {
        if let Some(node) = t.root() {
            n += 1;
            stack.push(node.left());
            stack.push(node.right());
        }
    }
    n
}

/// True iff every cached size and rank in `x` matches a recomputation.
pub fn caches_consistent<K>(x: &Tree<K>) -> bool {
    let mut stack = vec![x];
    while let Some(t) = stack.pop() {
        if let Some(node) = t.root() {
            if node.rank() != recompute_rank(t)
                || node.size() != node.left().size() + node.right().size() + 1
            {
                return false;
            }
            stack.push(node.left());
            stack.push(node.right());
        }
    }
    recompute_size(x) == x.size()
}

/// `rank x <= log2 sz x`, checked as `2^rank <= sz`.
pub fn rank_within_log2_sz<K>(x: &Tree<K>) -> bool {
    pow2_le(x.rank(), x.sz())
}

fn pow2_le(exp: u32, bound: u64) -> bool {
    exp < 64 && (1u64 << exp) <= bound
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureReport {
    pub rank: u32,
    pub prank: u32,
    pub size: u64,
    pub sz: u64,
    pub log2_sz: f64,
    pub log_phi_sz: f64,
}

impl MeasureReport {
    pub fn of<K>(x: &Tree<K>) -> Self {
        let sz = x.sz() as f64;
        MeasureReport {
            rank: x.rank(),
            prank: prank(x),
            size: x.size(),
            sz: x.sz(),
            log2_sz: sz.log2(),
            log_phi_sz: CONSTANTS.log_phi(sz),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

/// Which parts of the four-part rank/minor-rank meld lemma hold for a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Lemma2Report {
    /// `rank x <= prank x <= log2 sz x + 1`, for both inputs.
    pub i: bool,
    /// `min(rank x, rank y) <= rank(meld) <= rank x + rank y`.
    pub ii: bool,
    /// `rank(meld) <= max(prank x, prank y)`.
    pub iii: bool,
    /// `min(prank x, prank y) <= prank(meld) <= prank x + prank y`.
    pub iv: bool,
}

impl Lemma2Report {
    pub fn all(&self) -> bool {
        self.i && self.ii && self.iii && self.iv
    }
}

/// Evaluates the lemma on `x`, `y` and their rank-biased meld.
pub fn check_lemma2<K: Ord + Clone>(x: &Tree<K>, y: &Tree<K>) -> Lemma2Report {
    let z = Melder::new(Strategy::RankBiased).union(x, y);
    let part_i = |t: &Tree<K>| {
        let p = prank(t);
        t.rank() <= p && (p == 0 || pow2_le(p - 1, t.sz()))
    };
    let (rx, ry, rz) = (x.rank(), y.rank(), z.rank());
    let (px, py, pz) = (prank(x), prank(y), prank(&z));
    Lemma2Report {
        i: part_i(x) && part_i(y),
        ii: rx.min(ry) <= rz && rz <= rx + ry,
        iii: rz <= px.max(py),
        iv: px.min(py) <= pz && pz <= px + py,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(s: &str) -> Tree<i64> {
        s.parse().unwrap()
    }

    #[test]
    fn basic_measures() {
        let e: Tree<i64> = Tree::empty();
        assert_eq!((rank(&e), prank(&e), size(&e), sz(&e)), (0, 0, 0, 1));
        let s = Tree::single(2);
        assert_eq!((rank(&s), prank(&s)), (1, 1));
        let x = t("((() 2 ()) 1 ())");
        assert_eq!((rank(&x), prank(&x)), (1, 2));
    }

    #[test]
    fn report_json() {
        let r = MeasureReport::of(&t("((() 2 ()) 1 (() 3 ()))"));
        assert_eq!(r.sz, 4);
        assert_eq!(r.log2_sz, 2.0);
        assert!((r.log_phi_sz - 4f64.ln() / CONSTANTS.phi.ln()).abs() < 1e-12);
        let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(v["rank"], 2);
        assert_eq!(v["prank"], 2);
    }

    #[test]
    fn lemma2_on_empties() {
        assert!(check_lemma2::<i64>(&Tree::empty(), &Tree::empty()).all());
    }

    #[test]
    fn rank_bound_needs_a_leftist_shape() {
        // right-degenerate chain of 64 nodes: rank 64, sz 65
        let mut x = Tree::empty();
        for k in (0..64).rev() {
            x = Tree::node(Tree::empty(), k, x);
        }
        assert!(!rank_within_log2_sz(&x));
        assert!(rank_within_log2_sz(&t("((() 2 ()) 1 (() 3 ()))")));
    }

    #[test]
    fn cache_recomputation() {
        let x = t("(((() 4 ()) 2 ()) 1 (() 3 ()))");
        assert!(caches_consistent(&x));
        assert_eq!(recompute_rank(&x), 2);
        assert_eq!(recompute_size(&x), 4);
    }
}

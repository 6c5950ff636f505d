//! Adversarial families.
//!
//! * Golden trees `G_n`, built from Hofstadter's G-sequence
//!   `L(0) = 0, L(n) = n - L(L(n - 1))` with `R(n) = n - L(n)`:
//!   `G_0 = ()` and `G_n = (G_L(n-1), G_R(n-1))`. They are weight- and
//!   rank-leftist, and an unlabeled meld of `G_L(n)` and `G_R(n)` rebuilds
//!   `G_n` exactly, which is what drives the `log_phi` lower bound.
//! * The labeled family `W_k = (T_k 0 U_k)`, a rank-biased heap on which
//!   `del_min` costs `2k` comparisons while the rank potential drops by one.

use std::io::{self, Write};
use std::sync::Arc;

use serde::Serialize;

use crate::error::HeapError;
use crate::heap::{Melder, Strategy};
use crate::numfmt::sig12;
use crate::potentials::{potential, potential_delta, PotentialKind, CONSTANTS};
use crate::tree::Tree;

/// Memoized Hofstadter G-sequence.
#[derive(Debug, Clone)]
pub struct GSeq {
    l: Vec<u32>,
}

impl GSeq {
    /// Table of `L(0..=n_max)`.
    pub fn new(n_max: usize) -> Self {
        let mut l = vec![0u32; n_max + 1];
        for n in 1..=n_max {
            l[n] = n as u32 - l[l[n - 1] as usize];
        }
        GSeq { l }
    }

    pub fn n_max(&self) -> usize {
        self.l.len() - 1
    }

    pub fn g(&self, n: usize) -> usize {
        self.l[n] as usize
    }

    pub fn r(&self, n: usize) -> usize {
        n - self.g(n)
    }
}

/// `L(n)`, building a fresh table.
pub fn g(n: usize) -> usize {
    GSeq::new(n).g(n)
}

/// `R(n) = n - L(n)`, building a fresh table.
pub fn r(n: usize) -> usize {
    GSeq::new(n).r(n)
}

pub struct ShapeNode {
    left: Shape,
    right: Shape,
    size: u64,
    rank: u32,
}

impl Drop for ShapeNode {
    fn drop(&mut self) {
        let mut pending = vec![std::mem::take(&mut self.left), std::mem::take(&mut self.right)];
        while let Some(s) = pending.pop() {
            if let Some(arc) = s.0 {
                if let Ok(mut n) = Arc::try_unwrap(arc) {
                    pending.push(std::mem::take(&mut n.left));
                    pending.push(std::mem::take(&mut n.right));
                }
            }
        }
    }
}

/// An unlabeled binary tree.
#[derive(Clone, Default)]
pub struct Shape(Option<Arc<ShapeNode>>);

impl Shape {
    pub fn leaf() -> Self {
        Shape(None)
    }

    pub fn branch(left: Shape, right: Shape) -> Self {
        let size = left.size() + right.size() + 1;
        let rank = right.rank() + 1;
        Shape(Some(Arc::new(ShapeNode { left, right, size, rank })))
    }

    pub fn is_leaf(&self) -> bool {
        self.0.is_none()
    }

    pub fn children(&self) -> Option<(&Shape, &Shape)> {
        self.0.as_deref().map(|n| (&n.left, &n.right))
    }

    pub fn size(&self) -> u64 {
        self.0.as_ref().map_or(0, |n| n.size)
    }

    pub fn rank(&self) -> u32 {
        self.0.as_ref().map_or(0, |n| n.rank)
    }

    fn ptr_eq(&self, other: &Shape) -> bool {
        match (&self.0, &other.0) {
            (None, None) => true,
            (Some(a), Some(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }

    /// The shape of a labeled tree.
    pub fn of<K>(t: &Tree<K>) -> Shape {
        // post-order rebuild
        let mut out: Vec<Shape> = Vec::new();
        let mut stack: Vec<(&Tree<K>, bool)> = vec![(t, false)];
        while let Some((t, expanded)) = stack.pop() {
            match t.root() {
                None => out.push(Shape::leaf()),
                Some(n) if !expanded => {
                    stack.push((t, true));
                    stack.push((n.right(), false));
                    stack.push((n.left(), false));
                }
                Some(_) => {
                    let r = out.pop().expect("right built");
                    let l = out.pop().expect("left built");
                    out.push(Shape::branch(l, r));
                }
            }
        }
        out.pop().expect("root built")
    }

    /// True iff every node has `size left >= size right` and
    /// `rank left >= rank right`, as a pair of flags. Shared subtrees are
    /// visited once.
    pub fn leftist_flags(&self) -> (bool, bool) {
        let mut weight = true;
        let mut rank = true;
        let mut seen = std::collections::HashSet::new();
        let mut stack = vec![self];
        while let Some(s) = stack.pop() {
            let Some(n) = s.0.as_ref() else { continue };
            if !seen.insert(Arc::as_ptr(n) as usize) {
                continue;
            }
            weight &= n.left.size() >= n.right.size();
            rank &= n.left.rank() >= n.right.rank();
            stack.push(&n.left);
            stack.push(&n.right);
        }
        (weight, rank)
    }
}

impl PartialEq for Shape {
    fn eq(&self, other: &Self) -> bool {
        let mut stack = vec![(self, other)];
        while let Some((a, b)) = stack.pop() {
            if a.ptr_eq(b) {
                continue;
            }
            match (a.children(), b.children()) {
                (Some((al, ar)), Some((bl, br))) => {
                    if a.size() != b.size() {
                        return false;
                    }
                    stack.push((al, bl));
                    stack.push((ar, br));
                }
                _ => return false,
            }
        }
        true
    }
}

impl Eq for Shape {}

impl std::fmt::Debug for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.children() {
            None => f.write_str("()"),
            Some((l, r)) => write!(f, "({l:?} {r:?})"),
        }
    }
}

/// Unlabeled meld, `meld () () = ()` and `meld (t, u) y = (meld y u, t)`,
/// with `meld () y` read as `meld y ()`. Returns the result and the number
/// of unfoldings, which is always `rank x + rank y`.
pub fn unlabeled_meld(x: &Shape, y: &Shape) -> (Shape, u64) {
    let mut lefts: Vec<Shape> = Vec::new();
    let (mut x, mut y) = (x.clone(), y.clone());
    loop {
        if x.is_leaf() {
            if y.is_leaf() {
                break;
            }
            std::mem::swap(&mut x, &mut y);
        }
        let (t, u) = {
            let (t, u) = x.children().expect("non-leaf");
            (t.clone(), u.clone())
        };
        lefts.push(t);
        x = y;
        y = u;
    }
    let steps = lefts.len() as u64;
    let shape = lefts
        .into_iter()
        .rev()
        .fold(Shape::leaf(), |acc, t| Shape::branch(acc, t));
    (shape, steps)
}

/// Knuth's unlabeled Fibonacci tree of order `k`.
pub fn fibonacci_tree(k: usize) -> Shape {
    let mut trees = vec![Shape::leaf(), Shape::branch(Shape::leaf(), Shape::leaf())];
    for i in 2..=k {
        let t = Shape::branch(trees[i - 1].clone(), trees[i - 2].clone());
        trees.push(t);
    }
    trees.swap_remove(k)
}

/// Golden-tree measures up to `n_max`, from the size/rank recurrences.
/// Shapes are only materialized on request.
#[derive(Debug, Clone)]
pub struct GoldenTable {
    gseq: GSeq,
    size: Vec<u64>,
    rank: Vec<u32>,
}

impl GoldenTable {
    pub fn new(n_max: usize) -> Self {
        let gseq = GSeq::new(n_max);
        let mut size = vec![0u64; n_max + 1];
        let mut rank = vec![0u32; n_max + 1];
        for n in 1..=n_max {
            let (l, r) = (gseq.g(n - 1), gseq.r(n - 1));
            size[n] = size[l] + size[r] + 1;
            rank[n] = rank[r] + 1;
        }
        GoldenTable { gseq, size, rank }
    }

    pub fn gseq(&self) -> &GSeq {
        &self.gseq
    }

    pub fn n_max(&self) -> usize {
        self.size.len() - 1
    }

    pub fn size(&self, n: usize) -> u64 {
        self.size[n]
    }

    pub fn rank(&self, n: usize) -> u32 {
        self.rank[n]
    }

    /// Root of `G_n` is weight-leftist and rank-leftist. Every subtree of a
    /// golden tree is itself golden, so checking all roots `m <= n` covers
    /// every node of `G_n`.
    pub fn root_leftist(&self, n: usize) -> (bool, bool) {
        if n == 0 {
            return (true, true);
        }
        let (l, r) = (self.gseq.g(n - 1), self.gseq.r(n - 1));
        (self.size[l] >= self.size[r], self.rank[l] >= self.rank[r])
    }

    /// Comparisons of the meld rebuilding `G_n` from `G_L(n)` and `G_R(n)`,
    /// minus `log_phi(n + 1) - 2`.
    pub fn theorem2_gap(&self, n: usize) -> f64 {
        let cost = self.rank[self.gseq.g(n)] + self.rank[self.gseq.r(n)];
        cost as f64 - (CONSTANTS.log_phi((n + 1) as f64) - 2.0)
    }

    /// Comparisons of `del_min` on a heap shaped like `G_n` (a meld of
    /// `G_L(n-1)` and `G_R(n-1)`) minus `log_phi(sz G_n) - 2`.
    pub fn del_min_gap(&self, n: usize) -> f64 {
        assert!(n >= 1, "del_min needs a non-empty tree");
        let cost = self.rank[self.gseq.g(n - 1)] + self.rank[self.gseq.r(n - 1)];
        cost as f64 - (CONSTANTS.log_phi((n + 1) as f64) - 2.0)
    }

    /// All golden shapes `G_0..=G_m`, sharing subtrees.
    pub fn shapes(&self, m: usize) -> Vec<Shape> {
        let mut out: Vec<Shape> = Vec::with_capacity(m + 1);
        out.push(Shape::leaf());
        for n in 1..=m {
            let s = Shape::branch(
                out[self.gseq.g(n - 1)].clone(),
                out[self.gseq.r(n - 1)].clone(),
            );
            out.push(s);
        }
        out
    }
}

/// `G_n` as a shape.
pub fn golden(n: usize) -> Shape {
    GoldenTable::new(n).shapes(n).swap_remove(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GoldenReport {
    pub n: usize,
    pub size_ok: bool,
    pub weight_leftist: bool,
    pub rank_leftist: bool,
}

/// Checks the leftist conditions at every node of a materialized `G_n`.
pub fn check_golden_leftist(n: usize) -> GoldenReport {
    let g = golden(n);
    let (weight_leftist, rank_leftist) = g.leftist_flags();
    GoldenReport { n, size_ok: g.size() == n as u64, weight_leftist, rank_leftist }
}

/// `theorem2_gap` for one `n`.
pub fn theorem2_gap(n: usize) -> f64 {
    GoldenTable::new(n).theorem2_gap(n)
}

/// The complete binary tree of height `k` with every key equal to `a`.
/// Both children of each node are the same shared subtree.
pub fn perfect(k: u32, a: i64) -> Tree<i64> {
    (0..k).fold(Tree::empty(), |b, _| Tree::node(b.clone(), a, b))
}

/// The `W_k` family for one `k`.
#[derive(Debug, Clone)]
pub struct WkFamily {
    pub k: u32,
    pub t: Tree<i64>,
    pub u: Tree<i64>,
    pub w: Tree<i64>,
    /// `meld(T_k, U_k)` under the rank-biased strategy, i.e. `del_min(W_k)`.
    pub v: Tree<i64>,
    /// Comparisons spent computing `v`.
    pub del_min_cost: u64,
}

/// `T_2 = ((0) 0 (2))`, `U_2 = (B_2^1 1 (1))`, `T_k = (B_k^0 0 T_{k-1})`,
/// `U_k = (B_k^1 1 U_{k-1})` and `W_k = (T_k 0 U_k)`.
pub fn build_wk(k: u32) -> Result<WkFamily, HeapError> {
    if k < 2 {
        return Err(HeapError::FamilyIndex(k));
    }
    let mut t = Tree::node(Tree::single(0), 0, Tree::single(2));
    let mut u = Tree::node(perfect(2, 1), 1, Tree::single(1));
    for i in 3..=k {
        t = Tree::node(perfect(i, 0), 0, t);
        u = Tree::node(perfect(i, 1), 1, u);
    }
    let w = Tree::node(t.clone(), 0, u.clone());
    let mut m = Melder::new(Strategy::RankBiased);
    let v = m.del_min(&w)?;
    Ok(WkFamily { k, t, u, w, v, del_min_cost: m.meter().comparisons() })
}

/// `Phi(V_k) - Phi(W_k)`, evaluated on the trees.
pub fn wk_potential_drop(fam: &WkFamily, kind: &PotentialKind) -> Result<f64, HeapError> {
    match kind {
        PotentialKind::Rank | PotentialKind::KsUnclamped => {
            Ok(potential_delta(&[&fam.w], &[&fam.v], kind))
        }
        other => Err(HeapError::UnsupportedPotential(other.to_string())),
    }
}

/// The same drop by evaluating both potentials in full.
pub fn wk_potential_drop_full(fam: &WkFamily, kind: &PotentialKind) -> f64 {
    potential(&fam.v, kind) - potential(&fam.w, kind)
}

/// Closed form of the unclamped-KS potential drop:
/// `-1 + log_beta((2^(k+2) - 6)(2^(k+1) - 4) / ((2^(k+2) - 7)(2^(k+1) - 1)))`.
pub fn wk_drop_closed_form(k: u32) -> f64 {
    let p = |e: u32| 2f64.powi(e as i32);
    let num = (p(k + 2) - 6.0) * (p(k + 1) - 4.0);
    let den = (p(k + 2) - 7.0) * (p(k + 1) - 1.0);
    -1.0 + CONSTANTS.log_beta(num / den)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoldenRow {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "R")]
    pub r: usize,
    pub rank: u32,
    pub theorem2_gap: f64,
}

pub const GOLDEN_CSV_HEADER: &str = "n,L,R,rank,theorem2_gap";

pub fn golden_rows(n_max: usize) -> Vec<GoldenRow> {
    let table = GoldenTable::new(n_max);
    (0..=n_max)
        .map(|n| GoldenRow {
            n,
            l: table.gseq.g(n),
            r: table.gseq.r(n),
            rank: table.rank(n),
            theorem2_gap: table.theorem2_gap(n),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WkRow {
    pub k: u32,
    pub sz_w: u64,
    pub cost: u64,
    pub drop_rank: f64,
    pub drop_ks_unclamped: f64,
    pub amortized_rank: f64,
    pub amortized_ks_unclamped: f64,
}

pub const WK_CSV_HEADER: &str =
    "k,sz_w,cost,drop_rank,drop_ks_unclamped,amortized_rank,amortized_ks_unclamped";

pub fn wk_rows(k_min: u32, k_max: u32) -> Result<Vec<WkRow>, HeapError> {
    (k_min..=k_max)
        .map(|k| {
            let fam = build_wk(k)?;
            let drop_rank = wk_potential_drop(&fam, &PotentialKind::Rank)?;
            let drop_ks = wk_potential_drop(&fam, &PotentialKind::KsUnclamped)?;
            let cost = fam.del_min_cost;
            Ok(WkRow {
                k,
                sz_w: fam.w.sz(),
                cost,
                drop_rank,
                drop_ks_unclamped: drop_ks,
                amortized_rank: cost as f64 + drop_rank,
                amortized_ks_unclamped: cost as f64 + drop_ks,
            })
        })
        .collect()
}

pub fn write_golden_csv(rows: &[GoldenRow], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{GOLDEN_CSV_HEADER}")?;
    for r in rows {
        writeln!(w, "{},{},{},{},{}", r.n, r.l, r.r, r.rank, sig12(r.theorem2_gap))?;
    }
    Ok(())
}

pub fn write_wk_csv(rows: &[WkRow], mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{WK_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.k,
            r.sz_w,
            r.cost,
            sig12(r.drop_rank),
            sig12(r.drop_ks_unclamped),
            sig12(r.amortized_rank),
            sig12(r.amortized_ks_unclamped)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heap::validate;
    use crate::measures::{prank, recompute_rank, recompute_size};

    #[test]
    fn g_sequence() {
        let s = GSeq::new(20);
        let expect = [0, 1, 1, 2, 3, 3, 4, 4, 5, 6, 6, 7, 8, 8];
        for (n, &l) in expect.iter().enumerate() {
            assert_eq!(s.g(n), l, "L({n})");
        }
        assert_eq!((g(13), r(13)), (8, 5));
        assert_eq!(g(0), 0);
    }

    #[test]
    fn small_golden_trees() {
        assert!(golden(0).is_leaf());
        for k in 0..12 {
            let fib = |i: usize| {
                let (mut a, mut b) = (0usize, 1usize);
                for _ in 0..i {
                    (a, b) = (b, a + b);
                }
                a
            };
            let n = fib(k + 2) - 1;
            assert_eq!(golden(n), fibonacci_tree(k), "G_{n} vs Fibonacci tree {k}");
        }
        let r = check_golden_leftist(13);
        assert!(r.size_ok && r.weight_leftist && r.rank_leftist);
    }

    #[test]
    fn figure_three_meld() {
        let table = GoldenTable::new(13);
        let shapes = table.shapes(13);
        let (m, steps) = unlabeled_meld(&shapes[8], &shapes[5]);
        assert_eq!(m, shapes[13]);
        assert_eq!(steps, (shapes[8].rank() + shapes[5].rank()) as u64);
        assert_eq!(unlabeled_meld(&Shape::leaf(), &Shape::leaf()), (Shape::leaf(), 0));
    }

    #[test]
    fn gaps() {
        let t = GoldenTable::new(20);
        assert!((t.del_min_gap(1) - 0.5596).abs() < 1e-4);
        assert!(t.theorem2_gap(13) >= 0.0);
        assert!((t.theorem2_gap(1) - (1.0 - (CONSTANTS.log_phi(2.0) - 2.0))).abs() < 1e-12);
    }

    #[test]
    fn wk_small() {
        assert!(matches!(build_wk(1), Err(HeapError::FamilyIndex(1))));
        let f = build_wk(2).unwrap();
        assert_eq!(
            f.w.to_string(),
            "(((() 0 ()) 0 (() 2 ())) 0 (((() 1 ()) 1 (() 1 ())) 1 (() 1 ())))"
        );
        assert_eq!(f.w.sz(), 10);
        assert_eq!(f.del_min_cost, 4);
        assert_eq!(recompute_rank(&f.w), 3);
        assert!(validate(&f.w, Strategy::RankBiased).is_empty());
        // sz T_k < sz U_k, so the root is the one weight-biased violation
        let v = validate(&f.w, Strategy::WeightBiased);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "");
        assert!(validate(&f.t, Strategy::WeightBiased).is_empty());
        assert!(validate(&f.u, Strategy::WeightBiased).is_empty());
        // the smallest member is the exception: V_2 is weight-biased
        assert_eq!(
            f.v.to_string(),
            "((((() 1 ()) 1 (() 1 ())) 1 ((() 2 ()) 1 ())) 0 (() 0 ()))"
        );
        assert!(validate(&f.v, Strategy::WeightBiased).is_empty());
        let f3 = build_wk(3).unwrap();
        assert!(!validate(&f3.v, Strategy::WeightBiased).is_empty());
        assert_eq!(prank(&f3.w), 4);
        assert_eq!(recompute_size(&f3.w), 2u64.pow(5) - 7);
        let drop = wk_potential_drop(&f, &PotentialKind::KsUnclamped).unwrap();
        let expect = -1.0 + CONSTANTS.log_beta(40.0 / 63.0);
        assert!((drop - expect).abs() < 1e-12);
        assert!((wk_potential_drop_full(&f, &PotentialKind::KsUnclamped) - expect).abs() < 1e-12);
        assert!(wk_potential_drop(&f, &PotentialKind::KsClamped).is_err());
    }

    #[test]
    fn tables() {
        let rows = golden_rows(13);
        assert_eq!((rows[13].l, rows[13].r), (8, 5));
        assert_eq!(rows[0].rank, 0);
        let mut out = Vec::new();
        write_golden_csv(&rows[..2], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("n,L,R,rank,theorem2_gap\n0,0,0,0,2\n1,1,0,1,"));
        let wk = wk_rows(2, 4).unwrap();
        assert_eq!(wk.iter().map(|r| r.cost).collect::<Vec<_>>(), vec![4, 6, 8]);
    }
}

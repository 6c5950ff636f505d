//! Per-operation amortized cost records.

use std::fmt;
use std::io::{self, Write};

use serde::Serialize;

use crate::heap::Strategy;
use crate::numfmt::sig12;
use crate::potentials::{bound_for, potential, PotentialKind, Sum};
use crate::tree::Tree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OpKind {
    Empty,
    Single,
    Union,
    DelMin,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Empty => "empty",
            OpKind::Single => "single",
            OpKind::Union => "union",
            OpKind::DelMin => "del_min",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub op: OpKind,
    pub actual: u64,
    pub phi_before: f64,
    pub phi_after: f64,
    pub amortized: f64,
    /// `None` for creation operations and for (potential, strategy) pairs
    /// without a proven bound.
    pub bound: Option<f64>,
    pub slack: Option<f64>,
    /// `sz` of every consumed heap.
    pub sz_in: Vec<u64>,
    /// `sz` of the produced heap.
    pub sz_out: u64,
}

impl LedgerEntry {
    /// Builds an entry from a potential change computed elsewhere.
    pub fn from_delta(
        op: OpKind,
        actual: u64,
        phi_before: f64,
        delta: f64,
        sz_in: Vec<u64>,
        sz_out: u64,
        kind: &PotentialKind,
        strategy: Strategy,
    ) -> Self {
        let amortized = actual as f64 + delta;
        let bound = bound_for(op, &sz_in, sz_out, kind, strategy);
        LedgerEntry {
            op,
            actual,
            phi_before,
            phi_after: phi_before + delta,
            amortized,
            bound,
            slack: bound.map(|b| b - amortized),
            sz_in,
            sz_out,
        }
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), sig12);
        format!(
            "{},{},{},{},{},{},{}",
            self.op,
            self.actual,
            sig12(self.phi_before),
            sig12(self.phi_after),
            sig12(self.amortized),
            opt(self.bound),
            opt(self.slack)
        )
    }

    pub fn json_line(&self) -> String {
        let opt = |x: Option<f64>| x.map_or_else(|| "null".to_string(), sig12);
        format!(
            "{{\"op\":\"{}\",\"actual\":{},\"phi_before\":{},\"phi_after\":{},\"amortized\":{},\"bound\":{},\"slack\":{}}}",
            self.op,
            self.actual,
            sig12(self.phi_before),
            sig12(self.phi_after),
            sig12(self.amortized),
            opt(self.bound),
            opt(self.slack)
        )
    }
}

/// Amortized cost of one operation, evaluating every potential from scratch.
pub fn amortized_step<K>(
    op: OpKind,
    actual: u64,
    before: &[&Tree<K>],
    after: &[&Tree<K>],
    kind: &PotentialKind,
    strategy: Strategy,
) -> LedgerEntry {
    let total = |ts: &[&Tree<K>]| {
        let mut s = Sum::default();
        ts.iter().for_each(|t| s.add(potential(t, kind)));
        s.value()
    };
    let phi_before = total(before);
    let phi_after = total(after);
    let mut e = LedgerEntry::from_delta(
        op,
        actual,
        phi_before,
        phi_after - phi_before,
        before.iter().map(|t| t.sz()).collect(),
        after.first().map_or(1, |t| t.sz()),
        kind,
        strategy,
    );
    e.phi_after = phi_after;
    e
}

pub const CSV_HEADER: &str = "op,actual,phi_before,phi_after,amortized,bound,slack";

/// An ordered stream of ledger entries for one potential and strategy.
#[derive(Debug, Clone)]
pub struct Ledger {
    pub kind: PotentialKind,
    pub strategy: Strategy,
    pub entries: Vec<LedgerEntry>,
}

impl Ledger {
    pub fn new(kind: PotentialKind, strategy: Strategy) -> Self {
        Ledger { kind, strategy, entries: Vec::new() }
    }

    pub fn push(&mut self, e: LedgerEntry) {
        self.entries.push(e);
    }

    pub fn total_actual(&self) -> u64 {
        self.entries.iter().map(|e| e.actual).sum()
    }

    /// `sum(amortized) - sum(actual)`, i.e. the accumulated potential change.
    pub fn total_delta(&self) -> f64 {
        let mut s = Sum::default();
        for e in &self.entries {
            s.add(e.amortized - e.actual as f64);
        }
        s.value()
    }

    /// Smallest slack over the entries that carry a bound.
    pub fn min_slack(&self) -> Option<f64> {
        self.entries.iter().filter_map(|e| e.slack).reduce(f64::min)
    }

    /// Entries whose slack is below `-tol`.
    pub fn violations(&self, tol: f64) -> impl Iterator<Item = (usize, &LedgerEntry)> {
        self.entries
            .iter()
            .enumerate()
            .filter(move |(_, e)| e.slack.is_some_and(|s| s < -tol))
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for e in &self.entries {
            writeln!(w, "{}", e.csv_row())?;
        }
        Ok(())
    }

    pub fn write_json_lines(&self, mut w: impl Write) -> io::Result<()> {
        for e in &self.entries {
            writeln!(w, "{}", e.json_line())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_under_rank_has_no_bound() {
        let s = Tree::single(3);
        let e = amortized_step(
            OpKind::Single,
            0,
            &[],
            &[&s],
            &PotentialKind::Rank,
            Strategy::RankBiased,
        );
        assert_eq!(e.amortized, 1.0);
        assert_eq!(e.bound, None);
        assert_eq!(e.csv_row(), "single,0,0,1,1,n/a,n/a");
        assert_eq!(
            e.json_line(),
            r#"{"op":"single","actual":0,"phi_before":0,"phi_after":1,"amortized":1,"bound":null,"slack":null}"#
        );
    }

    #[test]
    fn csv_has_frozen_header() {
        let mut l = Ledger::new(PotentialKind::Rank, Strategy::WeightBiased);
        l.push(LedgerEntry::from_delta(
            OpKind::Union,
            2,
            1.0,
            0.0,
            vec![2, 2],
            3,
            &PotentialKind::Rank,
            Strategy::WeightBiased,
        ));
        let mut out = Vec::new();
        l.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "op,actual,phi_before,phi_after,amortized,bound,slack\n\
             union,2,1,1,2,1.58496250072,-0.415037499279\n"
        );
        assert_eq!(l.violations(1e-9).count(), 1);
    }
}

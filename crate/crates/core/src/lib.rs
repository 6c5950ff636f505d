//! A laboratory for mergeable priority queues.
//!
//! Skew heaps, weight-biased leftist heaps, rank-biased leftist heaps and
//! randomized leftist heaps all share one persistent binary tree type and
//! one meld kernel; they differ only in the balancing rule applied on the
//! way back up the merged right spine. Every meld counts its key
//! comparisons exactly, which is what the potential-function ledgers,
//! adversarial families and verification suites in this crate are built on.
//!
//! ```
//! use meldlab::{Melder, Strategy, Tree};
//!
//! let mut melder = Melder::new(Strategy::Skew);
//! let heap = melder.union(&Tree::single(1), &Tree::single(2));
//! assert_eq!(heap.to_string(), "((() 2 ()) 1 ())");
//! assert_eq!(melder.meter().comparisons(), 2);
//! ```

pub mod adversary;
pub mod error;
pub mod harness;
pub mod heap;
pub mod ledger;
pub mod measures;
pub mod potentials;
pub mod reachability;
pub mod tree;
pub mod workload;

mod numfmt;

pub use error::{HeapError, ParseError, ProgramError};
pub use heap::{validate, CostMeter, Melder, Strategy, TieBreak, Violation, ViolationKind};
pub use ledger::{Ledger, LedgerEntry, OpKind};
pub use potentials::{PotentialKind, CONSTANTS};
pub use reachability::{Instr, Program, Reg};
pub use tree::{ExtendedKey, Node, Tree};

/// Default key type used by programs, workloads and the CLI.
pub type Key = i64;

//! Heap programs, and generation of any rank-biased heap from `empty`,
//! `single` and `union` alone.
//!
//! The generator rests on a preimage construction: for every rank-biased
//! heap `x` there is a rank-biased heap `y` with `union((), y) == x`. Since
//! a meld with the empty heap still walks (and rebalances) the whole right
//! spine of `y`, `y` is `x` with the spine pre-swapped wherever the rank
//! rule will swap it back.
//!
//! A [`Program`] is a list of instructions over registers. Every register is
//! written once and read at most once, so a replay consumes heaps linearly
//! and the potential of the live registers is well defined at every step.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{HeapError, ProgramError};
use crate::heap::{ensure_valid, Melder, Strategy};
use crate::ledger::{Ledger, LedgerEntry, OpKind};
use crate::potentials::{potential, potential_delta, PotentialKind, Sum};
use crate::tree::Tree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Reg(pub u32);

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

impl FromStr for Reg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('r')
            .and_then(|n| n.parse().ok())
            .map(Reg)
            .ok_or_else(|| format!("expected a register like r0, got {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instr<K> {
    MakeEmpty { dst: Reg },
    MakeSingle { dst: Reg, key: K },
    Union { dst: Reg, a: Reg, b: Reg },
    DelMin { dst: Reg, src: Reg },
}

impl<K> Instr<K> {
    pub fn dst(&self) -> Reg {
        match self {
            Instr::MakeEmpty { dst }
            | Instr::MakeSingle { dst, .. }
            | Instr::Union { dst, .. }
            | Instr::DelMin { dst, .. } => *dst,
        }
    }

    pub fn sources(&self) -> Vec<Reg> {
        match self {
            Instr::MakeEmpty { .. } | Instr::MakeSingle { .. } => vec![],
            Instr::Union { a, b, .. } => vec![*a, *b],
            Instr::DelMin { src, .. } => vec![*src],
        }
    }

    pub fn op(&self) -> OpKind {
        match self {
            Instr::MakeEmpty { .. } => OpKind::Empty,
            Instr::MakeSingle { .. } => OpKind::Single,
            Instr::Union { .. } => OpKind::Union,
            Instr::DelMin { .. } => OpKind::DelMin,
        }
    }
}

impl<K: fmt::Display> fmt::Display for Instr<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instr::MakeEmpty { dst } => write!(f, "EMPTY {dst}"),
            Instr::MakeSingle { dst, key } => write!(f, "SINGLE {dst} {key}"),
            Instr::Union { dst, a, b } => write!(f, "UNION {dst} {a} {b}"),
            Instr::DelMin { dst, src } => write!(f, "DELMIN {dst} {src}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program<K> {
    pub instrs: Vec<Instr<K>>,
    /// 1-based source line of each instruction, when parsed from text.
    pub lines: Vec<usize>,
}

impl<K> Default for Program<K> {
    fn default() -> Self {
        Program { instrs: Vec::new(), lines: Vec::new() }
    }
}

impl<K> Program<K> {
    pub fn new(instrs: Vec<Instr<K>>) -> Self {
        Program { instrs, lines: Vec::new() }
    }

    pub fn push(&mut self, i: Instr<K>) {
        self.instrs.push(i);
    }

    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    /// Source line for instruction `index`, falling back to `index + 1`.
    pub fn line_of(&self, index: usize) -> usize {
        self.lines.get(index).copied().unwrap_or(index + 1)
    }

    /// Rejects empty programs and any register that is read before being
    /// written, written twice, or read twice.
    pub fn check_linear(&self) -> Result<(), ProgramError> {
        if self.instrs.is_empty() {
            return Err(ProgramError::Empty);
        }
        // register -> consumed?
        let mut state: HashMap<Reg, bool> = HashMap::new();
        for (index, ins) in self.instrs.iter().enumerate() {
            for src in ins.sources() {
                match state.get_mut(&src) {
                    None => return Err(ProgramError::ReadBeforeWrite { index, reg: src.0 }),
                    Some(true) => return Err(ProgramError::ReadTwice { index, reg: src.0 }),
                    Some(read) => *read = true,
                }
            }
            let dst = ins.dst();
            if state.insert(dst, false).is_some() {
                return Err(ProgramError::WrittenTwice { index, reg: dst.0 });
            }
        }
        Ok(())
    }
}

impl<K: fmt::Display> fmt::Display for Program<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.instrs {
            writeln!(f, "{i}")?;
        }
        Ok(())
    }
}

impl<K: FromStr> FromStr for Program<K> {
    type Err = ProgramError;

    /// One instruction per line; `#` starts a comment; blank lines are skipped.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Program::default();
        for (n, raw) in s.lines().enumerate() {
            let line = n + 1;
            let text = raw.split('#').next().unwrap_or("");
            let words: Vec<&str> = text.split_whitespace().collect();
            if words.is_empty() {
                continue;
            }
            let perr = |message: String| ProgramError::Parse { line, message };
            let reg = |w: &str| w.parse::<Reg>().map_err(perr);
            let arity = |k: usize| {
                if words.len() == k + 1 {
                    Ok(())
                } else {
                    Err(perr(format!("{} takes {k} operands", words[0])))
                }
            };
            let ins = match words[0].to_ascii_uppercase().as_str() {
                "EMPTY" => {
                    arity(1)?;
                    Instr::MakeEmpty { dst: reg(words[1])? }
                }
                "SINGLE" => {
                    arity(2)?;
                    let key = words[2]
                        .parse()
                        .map_err(|_| perr(format!("invalid key {:?}", words[2])))?;
                    Instr::MakeSingle { dst: reg(words[1])?, key }
                }
                "UNION" => {
                    arity(3)?;
                    Instr::Union { dst: reg(words[1])?, a: reg(words[2])?, b: reg(words[3])? }
                }
                "DELMIN" => {
                    arity(2)?;
                    Instr::DelMin { dst: reg(words[1])?, src: reg(words[2])? }
                }
                other => return Err(perr(format!("unknown instruction {other:?}"))),
            };
            p.instrs.push(ins);
            p.lines.push(line);
        }
        Ok(p)
    }
}

/// Result of running a program.
#[derive(Debug, Clone)]
pub struct Replay<K> {
    /// Heap in the destination register of the last instruction.
    pub result: Tree<K>,
    /// Heaps still unread when the program ends, by register.
    pub live: Vec<(Reg, Tree<K>)>,
    pub comparisons: u64,
}

/// Runs `p` with `melder`, returning the final register's heap.
pub fn replay<K: Ord + Clone>(p: &Program<K>, melder: &mut Melder) -> Result<Tree<K>, ProgramError> {
    run(p, melder, None, &mut |_, _| {}).map(|(r, _)| r.result)
}

/// Runs `p` and records one ledger entry per instruction under `kind`.
///
/// `phi_before`/`phi_after` are the total potential of all live registers.
pub fn replay_with_ledger<K: Ord + Clone>(
    p: &Program<K>,
    melder: &mut Melder,
    kind: &PotentialKind,
) -> Result<(Replay<K>, Ledger), ProgramError> {
    let (r, l) = run(p, melder, Some(kind), &mut |_, _| {})?;
    Ok((r, l.expect("ledger requested")))
}

/// Runs `p`, handing every produced heap to `observe` together with the
/// index of the instruction that produced it. A ledger is kept when `kind`
/// is given.
pub fn replay_traced<K: Ord + Clone>(
    p: &Program<K>,
    melder: &mut Melder,
    kind: Option<&PotentialKind>,
    mut observe: impl FnMut(usize, &Tree<K>),
) -> Result<(Replay<K>, Option<Ledger>), ProgramError> {
    run(p, melder, kind, &mut observe)
}

fn run<K: Ord + Clone>(
    p: &Program<K>,
    melder: &mut Melder,
    kind: Option<&PotentialKind>,
    observe: &mut dyn FnMut(usize, &Tree<K>),
) -> Result<(Replay<K>, Option<Ledger>), ProgramError> {
    p.check_linear()?;
    let strategy = melder.strategy();
    let mut ledger = kind.map(|k| Ledger::new(k.clone(), strategy));
    let mut regs: HashMap<Reg, Tree<K>> = HashMap::new();
    let mut live_phi = Sum::default();
    let start = melder.meter().comparisons();
    for (index, ins) in p.instrs.iter().enumerate() {
        let inputs: Vec<Tree<K>> = ins
            .sources()
            .iter()
            .map(|r| regs.remove(r).expect("linearity checked"))
            .collect();
        let (out, actual) = melder.measure(|m| match ins {
            Instr::MakeEmpty { .. } => Ok(Tree::empty()),
            Instr::MakeSingle { key, .. } => Ok(Tree::single(key.clone())),
            Instr::Union { .. } => Ok(m.union(&inputs[0], &inputs[1])),
            Instr::DelMin { .. } => m.del_min(&inputs[0]).map_err(|_| ProgramError::EmptyHeap { index }),
        });
        let out = out?;
        if let (Some(ledger), Some(kind)) = (ledger.as_mut(), kind) {
            let before: Vec<&Tree<K>> = inputs.iter().collect();
            let delta = match ins.op() {
                OpKind::Empty => 0.0,
                OpKind::Single => potential(&out, kind),
                _ => potential_delta(&before, &[&out], kind),
            };
            let phi_before = live_phi.value();
            live_phi.add(delta);
            let mut e = LedgerEntry::from_delta(
                ins.op(),
                actual,
                phi_before,
                delta,
                inputs.iter().map(|t| t.sz()).collect(),
                out.sz(),
                kind,
                strategy,
            );
            e.phi_after = live_phi.value();
            ledger.push(e);
        }
        observe(index, &out);
        regs.insert(ins.dst(), out);
    }
    let last = p.instrs.last().expect("non-empty program").dst();
    let result = regs.get(&last).cloned().expect("last destination is live");
    let mut live: Vec<(Reg, Tree<K>)> = regs.into_iter().collect();
    live.sort_by_key(|(r, _)| *r);
    let comparisons = melder.meter().comparisons() - start;
    Ok((Replay { result, live, comparisons }, ledger))
}

/// A rank-biased heap `y` with `union((), y) == x` under the rank-biased
/// strategy (with swap-on-tie).
pub fn preimage<K: Ord + Clone>(x: &Tree<K>) -> Result<Tree<K>, HeapError> {
    ensure_valid(x, Strategy::RankBiased)?;
    Ok(preimage_unchecked(x))
}

fn preimage_unchecked<K: Clone>(x: &Tree<K>) -> Tree<K> {
    let mut chain: Vec<(Tree<K>, K)> = Vec::new();
    let mut cur = x;
    while let Some(n) = cur.root() {
        let (t, u) = (n.left(), n.right());
        if t.rank() == u.rank() {
            chain.push((u.clone(), n.key().clone()));
            cur = t;
        } else {
            chain.push((t.clone(), n.key().clone()));
            cur = u;
        }
    }
    chain
        .into_iter()
        .rev()
        .fold(Tree::empty(), |acc, (kept, key)| Tree::node(kept, key, acc))
}

/// A program over `EMPTY`, `SINGLE` and `UNION` whose rank-biased replay
/// rebuilds `x` node for node. Registers are numbered densely in
/// post-order.
pub fn compile_generation<K: Ord + Clone>(x: &Tree<K>) -> Result<Program<K>, HeapError> {
    ensure_valid(x, Strategy::RankBiased)?;
    enum Task<K> {
        Gen(Tree<K>),
        Combine,
    }
    let mut prog = Program::default();
    let mut next = 0u32;
    let mut fresh = || {
        next += 1;
        Reg(next - 1)
    };
    let mut tasks = vec![Task::Gen(x.clone())];
    let mut done: Vec<Reg> = Vec::new();
    while let Some(task) = tasks.pop() {
        match task {
            Task::Combine => {
                let b = done.pop().expect("second operand");
                let a = done.pop().expect("first operand");
                let dst = fresh();
                prog.push(Instr::Union { dst, a, b });
                done.push(dst);
            }
            Task::Gen(x) => {
                let Some(n) = x.root() else {
                    let dst = fresh();
                    prog.push(Instr::MakeEmpty { dst });
                    done.push(dst);
                    continue;
                };
                let (t, a, u) = (n.left(), n.key(), n.right());
                if t.is_empty() && u.is_empty() {
                    let dst = fresh();
                    prog.push(Instr::MakeSingle { dst, key: a.clone() });
                    done.push(dst);
                    continue;
                }
                // x = union((u a ()), y) with union((), y) = t when the ranks
                // tie, and x = union((t a ()), y) with union((), y) = u
                // otherwise. When u is empty the second form would be x
                // itself, so the first form is used: bal swaps (() a t)
                // because 0 <= rank t.
                let (first, second) = if t.rank() == u.rank() || u.is_empty() {
                    (Tree::node(u.clone(), a.clone(), Tree::empty()), preimage_unchecked(t))
                } else {
                    (Tree::node(t.clone(), a.clone(), Tree::empty()), preimage_unchecked(u))
                };
                tasks.push(Task::Combine);
                tasks.push(Task::Gen(second));
                tasks.push(Task::Gen(first));
            }
        }
    }
    Ok(prog)
}

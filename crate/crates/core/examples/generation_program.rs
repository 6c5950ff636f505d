// Every rank-biased heap is reachable: compile a heap into a program of
// EMPTY/SINGLE/UNION instructions and replay it.

use std::error::Error;
use std::io::{self, Write};

use meldlab::reachability::{compile_generation, replay};
use meldlab::{Melder, Program, Strategy, TieBreak, Tree};

pub fn run(out: &mut impl Write) -> Result<(), Box<dyn Error>> {
    let x: Tree<i64> = "(((() 3 ()) 2 (() 4 ())) 1 (() 2 ()))".parse()?;
    let p = compile_generation(&x)?;
    write!(out, "{p}")?;

    let y = replay(&p, &mut Melder::new(Strategy::RankBiased))?;
    writeln!(out, "replayed: {y} (equal: {})", y == x)?;

    let text: Program<i64> = p.to_string().parse()?;
    let keep = Melder::new(Strategy::RankBiased).with_tie_break(TieBreak::Keep);
    let z = replay(&text, &mut { keep })?;
    writeln!(out, "keep-on-tie: {z} (equal: {})", z == x)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}

// Golden trees: shapes that rebuild themselves under meld and meet the
// `log_phi` lower bound.

use std::error::Error;
use std::io::{self, Write};

use meldlab::adversary::{check_golden_leftist, golden, golden_rows, unlabeled_meld, write_golden_csv, GSeq};

pub fn run(out: &mut impl Write) -> Result<(), Box<dyn Error>> {
    write_golden_csv(&golden_rows(13), &mut *out)?;

    let g = GSeq::new(13);
    let (l, r) = (golden(g.g(13)), golden(g.r(13)));
    let (z, steps) = unlabeled_meld(&l, &r);
    writeln!(out, "\nmeld(G_8, G_5) = G_13: {} in {steps} steps", z == golden(13))?;
    writeln!(out, "G_13 = {z:?}")?;
    writeln!(out, "{:?}", check_golden_leftist(1000))?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}

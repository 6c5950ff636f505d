// The W_k family: rank-biased heaps whose del_min costs 2k comparisons
// while the usual potentials drop by about one.

use std::error::Error;
use std::io::{self, Write};

use meldlab::adversary::{build_wk, wk_rows, write_wk_csv};
use meldlab::{validate, Strategy};

pub fn run(out: &mut impl Write) -> Result<(), Box<dyn Error>> {
    write_wk_csv(&wk_rows(2, 12)?, &mut *out)?;

    let f = build_wk(3)?;
    writeln!(out, "\nW_3 = {}", f.w)?;
    writeln!(out, "V_3 = {}", f.v)?;
    for v in validate(&f.v, Strategy::WeightBiased) {
        writeln!(out, "V_3: {v}")?;
    }
    for v in validate(&f.w, Strategy::WeightBiased) {
        writeln!(out, "W_3: {v}")?;
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}

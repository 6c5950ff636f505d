// Randomized leftist heaps: swap with probability p and measure costs
// relative to `log2 sz`.

use std::error::Error;
use std::io::{self, Write};

use meldlab::harness::{randomized_gate, randomized_table, write_randomized_csv};

pub fn run(out: &mut impl Write) -> Result<(), Box<dyn Error>> {
    let rows = randomized_table(&[0.25, 0.75], 2048, 8, 1)?;
    write_randomized_csv(&rows, &mut *out)?;
    let gate = randomized_gate(&rows);
    writeln!(out, "\n{}: {} ({})", gate.name, if gate.passed { "pass" } else { "fail" }, gate.detail)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}

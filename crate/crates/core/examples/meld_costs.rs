// Four balancing strategies, one meld kernel: the comparison count of
// every union is `rank x + rank y`, whatever the strategy.

use std::error::Error;
use std::io::{self, Write};

use meldlab::{Melder, Strategy, Tree};

pub fn run(out: &mut impl Write) -> Result<(), Box<dyn Error>> {
    let strategies = [
        Strategy::Skew,
        Strategy::WeightBiased,
        Strategy::RankBiased,
        Strategy::randomized(0.5, 7)?,
    ];
    for s in strategies {
        let mut m = Melder::new(s);
        let mut x = Tree::empty();
        let mut y = Tree::empty();
        for k in 0..500i64 {
            x = m.insert((k * 37) % 1000, &x);
            y = m.insert((k * 53) % 1000 + 1, &y);
        }
        let (z, cost) = m.measure(|m| m.union(&x, &y));
        writeln!(
            out,
            "{:>18}: rank x = {:>2}, rank y = {:>2}, union cost = {cost:>2}, rank result = {}",
            s.to_string(),
            x.rank(),
            y.rank(),
            z.rank()
        )?;
    }

    let mut m = Melder::new(Strategy::Skew);
    let h = m.union(&Tree::single(1), &Tree::single(2));
    writeln!(out, "skew union of 1 and 2: {h}, {} comparisons", m.meter().comparisons())?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}

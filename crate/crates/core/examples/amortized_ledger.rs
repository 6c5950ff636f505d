// Replays one random workload under a weight-biased heap and prints the
// amortized-cost ledger summary for several potentials.

use std::error::Error;
use std::io::{self, Write};

use meldlab::harness::bench;
use meldlab::workload::WorkloadSpec;
use meldlab::{PotentialKind, Strategy};

pub fn run(out: &mut impl Write) -> Result<(), Box<dyn Error>> {
    let spec = WorkloadSpec::new(Strategy::WeightBiased, 5_000, 11);
    for kind in ["ks", "rank", "convex:0.5", "st"] {
        let kind: PotentialKind = kind.parse()?;
        let r = bench(&spec, &kind)?;
        let a = &r.aggregates;
        writeln!(
            out,
            "{kind:>12}: {} entries, actual {}, min slack {}, violations {}, telescoping error {:.1e}",
            a.ops,
            a.total_actual,
            a.min_slack.map_or("n/a".into(), |s| format!("{s:.4}")),
            a.violations,
            r.telescoping_error
        )?;
    }

    let r = bench(&spec, &PotentialKind::KsClamped)?;
    writeln!(out, "\nfirst ledger rows:")?;
    let mut csv = Vec::new();
    r.ledger.write_csv(&mut csv)?;
    for line in String::from_utf8(csv)?.lines().take(14) {
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}

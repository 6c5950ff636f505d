// Runs every verification suite at a small scale and prints one line per
// check.

use std::error::Error;
use std::io::{self, Write};

use meldlab::harness::{verify, Suite};

pub fn run(out: &mut impl Write) -> Result<(), Box<dyn Error>> {
    for suite in Suite::EACH {
        let scale = match suite {
            Suite::Wk => 12,
            Suite::Reachability => 50,
            _ => 2_000,
        };
        for r in verify(suite, Some(scale), 1)? {
            for c in &r.checks {
                let mark = if c.passed { "ok  " } else { "FAIL" };
                writeln!(out, "{mark} {:<13} {:<34} {}", r.suite, c.name, c.detail)?;
                for e in &c.examples {
                    writeln!(out, "       {e}")?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run(&mut io::stdout().lock())
}

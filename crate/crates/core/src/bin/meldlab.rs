use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use meldlab::harness::{
    bench, exit_code, randomized_gate, randomized_table, replay_text, verify, write_randomized_csv,
    write_verify_csv, write_verify_json, json_lines, AdversaryTable, Suite,
};
use meldlab::workload::{KeyDist, OpMix, WorkloadSpec};
use meldlab::{PotentialKind, Strategy};

#[derive(Parser)]
#[command(name = "meldlab", version, about = "Meld-cost experiments on skew and leftist heaps")]
struct Cli {
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Size parameter of the command (suite scale, workload ops, heap size).
    #[arg(long, global = true)]
    scale: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite; exit 1 on any violation.
    Verify {
        /// costs, leftist, lemma2, theorem1, section3, convex, wk, golden, reachability or all
        suite: String,
    },
    /// Run a random workload and print its amortized-cost ledger.
    Bench {
        #[arg(long, default_value = "weight")]
        strategy: Strategy,
        /// rank, prank, ks, ks-unclamped, st, convex:LAMBDA
        #[arg(long, default_value = "ks")]
        potential: PotentialKind,
        /// Insert, union and del_min weights.
        #[arg(long, default_value = "0.5:0.2:0.3")]
        mix: OpMix,
        /// permutation or uniform:LO:HI
        #[arg(long, default_value = "permutation")]
        keys: KeyDist,
        #[arg(long, default_value_t = 8)]
        heaps: usize,
        /// Write the aggregate JSON here instead of stderr.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Randomized-heap cost ratios over a grid of swap probabilities.
    Randomized {
        /// Comma-separated swap probabilities; 1/2, 1/phi and 1 are always added.
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.75")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// Print the golden-tree or W_k table.
    Adversary {
        #[arg(value_parser = ["golden", "wk"])]
        which: String,
        /// N, or A..B
        param: String,
    },
    /// Replay a program file and print the final heap and its cost.
    Replay {
        file: PathBuf,
        #[arg(long, default_value = "rank")]
        strategy: Strategy,
    },
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("meldlab: {msg}");
    ExitCode::from(2)
}

fn output(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    let json = cli.format == Format::Json;
    let mut w = output(&cli.out).map_err(usage)?;
    let code = match cli.cmd {
        Cmd::Verify { suite } => {
            let suite: Suite = suite.parse().map_err(usage)?;
            let reports = verify(suite, cli.scale, cli.seed).map_err(usage)?;
            if json {
                write_verify_json(&reports, &mut w)
            } else {
                write_verify_csv(&reports, &mut w)
            }
            .map_err(usage)?;
            exit_code(&reports)
        }
        Cmd::Bench { strategy, potential, mix, keys, heaps, summary } => {
            let mut spec = WorkloadSpec::new(strategy, cli.scale.unwrap_or(100_000) as usize, cli.seed);
            spec.mix = mix;
            spec.keys = keys;
            spec.heaps = heaps;
            let report = bench(&spec, &potential).map_err(usage)?;
            if json {
                report.ledger.write_json_lines(&mut w)
            } else {
                report.ledger.write_csv(&mut w)
            }
            .map_err(usage)?;
            let line = report.summary_json();
            match summary {
                Some(p) => std::fs::write(p, format!("{line}\n")).map_err(usage)?,
                None => eprintln!("{line}"),
            }
            report.exit_code()
        }
        Cmd::Randomized { p, trials } => {
            let n = cli.scale.unwrap_or(1 << 14) as usize;
            let rows = randomized_table(&p, n, trials, cli.seed).map_err(usage)?;
            if json { json_lines(&rows, &mut w) } else { write_randomized_csv(&rows, &mut w) }
                .map_err(usage)?;
            let gate = randomized_gate(&rows);
            eprintln!(
                "statistical: {} {} ({})",
                gate.name,
                if gate.passed { "pass" } else { "FAIL" },
                gate.detail
            );
            i32::from(!gate.passed)
        }
        Cmd::Adversary { which, param } => {
            let table = AdversaryTable::parse(&which, &param).map_err(usage)?;
            table.write(json, &mut w).map_err(usage)?;
            0
        }
        Cmd::Replay { file, strategy } => {
            let text = std::fs::read_to_string(&file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let (tree, cost) = replay_text(&text, strategy).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            if json {
                let v = serde_json::json!({ "tree": tree.to_string(), "comparisons": cost });
                writeln!(w, "{v}")
            } else {
                writeln!(w, "tree,comparisons\n{tree},{cost}")
            }
            .map_err(usage)?;
            0
        }
    };
    w.flush().map_err(usage)?;
    Ok(ExitCode::from(code as u8))
}

fn main() -> ExitCode {
    run(Cli::parse()).unwrap_or_else(|code| code)
}

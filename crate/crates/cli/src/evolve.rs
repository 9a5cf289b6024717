use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use dalex::evolve::{build_problem, fidelity_trace, run_evolution, GenerationRecord};
use dalex::{RandomSource, SelectorRegistry};
use serde::Serialize;

use crate::config::FileConfig;
use crate::error::{in_section, CliError, CliResult};

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Seed of the first run; run `r` uses `seed + r`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Output directory, created if missing.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Serialize)]
struct Tagged<'a, T> {
    seed: u64,
    #[serde(flatten)]
    record: &'a T,
}

/// Writes `records.jsonl`, `summary.csv` and, when fidelity tracing is
/// enabled, `fidelity.jsonl` into the output directory.
pub fn run(args: &EvolveArgs) -> CliResult<()> {
    let file = FileConfig::load(Some(&args.config))?;
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let runs = args.runs.or(file.runs).unwrap_or(1);
    if runs == 0 {
        return Err(CliError::config("runs", "must be >= 1"));
    }
    let registry = SelectorRegistry::with_builtins();
    let selector = registry.build(&file.selector).map_err(in_section("selector"))?;
    let problem = build_problem(&file.problem)?;
    file.run.validate()?;
    if file.fidelity.enabled && file.fidelity.samples == 0 {
        return Err(CliError::config("fidelity.samples", "must be >= 1"));
    }

    fs::create_dir_all(&args.output).map_err(CliError::io(format!("creating {}", args.output.display())))?;
    let mut records = writer(&args.output, "records.jsonl")?;
    let mut summary = writer(&args.output, "summary.csv")?;
    let mut fidelity = if file.fidelity.enabled {
        Some(writer(&args.output, "fidelity.jsonl")?)
    } else {
        None
    };
    let io = || CliError::io(format!("writing to {}", args.output.display()));

    writeln!(summary, "seed,success,generations_to_success,mean_selection_seconds").map_err(io())?;
    for r in 0..runs as u64 {
        let run_seed = seed.wrapping_add(r);
        let rng = RandomSource::new(run_seed);
        let outcome = if let Some(out) = fidelity.as_mut() {
            let trace = fidelity_trace(
                problem.as_ref(),
                &file.selector,
                &registry,
                &file.run,
                file.fidelity.samples,
                file.fidelity.mode,
                &rng,
            )?;
            for rep in &trace.reports {
                write_line(out, run_seed, rep)?;
            }
            trace.run
        } else {
            run_evolution(problem.as_ref(), selector.as_ref(), &file.run, &rng)?
        };
        for rec in &outcome.records {
            write_line::<GenerationRecord>(&mut records, run_seed, rec)?;
        }
        writeln!(
            summary,
            "{},{},{},{}",
            run_seed,
            outcome.success,
            opt(outcome.success_generation),
            opt(outcome.mean_selection_seconds())
        )
        .map_err(io())?;
    }
    records.flush().map_err(io())?;
    summary.flush().map_err(io())?;
    if let Some(mut f) = fidelity {
        f.flush().map_err(io())?;
    }
    Ok(())
}

fn writer(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    let path = dir.join(name);
    let f = File::create(&path).map_err(CliError::io(format!("creating {}", path.display())))?;
    Ok(BufWriter::new(f))
}

fn write_line<T: Serialize>(out: &mut impl Write, seed: u64, record: &T) -> CliResult<()> {
    serde_json::to_writer(&mut *out, &Tagged { seed, record })?;
    writeln!(out).map_err(CliError::io("writing output"))
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

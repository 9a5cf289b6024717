use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Args;
use dalex::oracle::{empirical_distribution, SelectionDistribution};
use dalex::population::{build_classes, read_error_csv, read_support_csv};
use dalex::{EquivalenceClassing, RandomSource, SelectorRegistry, SupportMatrix};

use crate::config::{FileConfig, SelectorArgs};
use crate::error::{in_section, CliResult};

#[derive(Debug, Args)]
pub struct SelectArgs {
    /// Error matrix CSV: one row per individual, one column per case.
    pub errors: PathBuf,
    /// 0/1 support matrix CSV of the same shape.
    #[arg(long)]
    pub support: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub selector: SelectorArgs,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of selections; defaults to the population size.
    #[arg(long)]
    pub count: Option<usize>,
    /// Print the empirical selection distribution as JSON instead of indices.
    #[arg(long)]
    pub emit_distribution: bool,
}

/// Reads an error matrix and optional support matrix and groups them.
pub fn load_classes(errors: &Path, support: Option<&Path>) -> CliResult<EquivalenceClassing> {
    let errors = read_error_csv(errors)?;
    let support = match support {
        Some(p) => read_support_csv(p)?,
        None => SupportMatrix::full(errors.n_rows(), errors.n_cols()),
    };
    Ok(build_classes(&errors, &support)?)
}

pub fn run(args: &SelectArgs, out: &mut dyn Write) -> CliResult<()> {
    let file = FileConfig::load(args.config.as_deref())?;
    let mut cfg = file.selector;
    args.selector.apply(&mut cfg)?;
    let seed = args.seed.or(file.seed).unwrap_or(cfg.seed);

    let registry = SelectorRegistry::with_builtins();
    let selector = registry.build(&cfg).map_err(in_section("selector"))?;
    let classing = load_classes(&args.errors, args.support.as_deref())?;
    let count = args.count.unwrap_or(classing.population_size());

    let picked = selector.select_individuals(&classing, count, &RandomSource::new(seed))?;
    if args.emit_distribution {
        let dist: SelectionDistribution = empirical_distribution(&picked, classing.population_size())?;
        serde_json::to_writer(&mut *out, &dist)?;
        writeln!(out).map_err(crate::error::CliError::io("writing output"))?;
    } else {
        for i in picked {
            writeln!(out, "{i}").map_err(crate::error::CliError::io("writing output"))?;
        }
    }
    Ok(())
}

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use dalex::bench::{run_bench, write_csv, BenchConfig, Regime};
use dalex::{SelectorConfig, SelectorRegistry};

use crate::error::{in_section, CliError, CliResult};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Population sizes.
    #[arg(long = "n", value_delimiter = ',', default_value = "1000")]
    pub ns: Vec<usize>,
    /// Case counts.
    #[arg(long = "m", value_delimiter = ',', default_value = "200")]
    pub ms: Vec<usize>,
    /// Data regimes: discrete, continuous_all_distinct, partial_support.
    #[arg(long = "regime", value_delimiter = ',', default_value = "continuous_all_distinct")]
    pub regimes: Vec<String>,
    /// Methods as `name[:key=value,...]`; repeatable.
    #[arg(long = "method", default_values_t = ["dalex:pressure=200".to_string(), "lexicase".to_string()])]
    pub methods: Vec<String>,
    /// Timed repetitions per cell, after one warm-up.
    #[arg(long, default_value_t = 5)]
    pub repetitions: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Allow selectors to use multiple threads.
    #[arg(long)]
    pub parallel: bool,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn run(args: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let regimes = args
        .regimes
        .iter()
        .map(|r| r.parse::<Regime>())
        .collect::<Result<Vec<_>, _>>()?;
    let methods = args
        .methods
        .iter()
        .map(|m| SelectorConfig::from_spec(m).map_err(in_section("method")))
        .collect::<CliResult<Vec<_>>>()?;
    let cfg = BenchConfig {
        ns: args.ns.clone(),
        ms: args.ms.clone(),
        regimes,
        methods,
        repetitions: args.repetitions,
        seed: args.seed,
        parallel: args.parallel,
    };
    let records = run_bench(&SelectorRegistry::with_builtins(), &cfg)?;
    match &args.output {
        Some(path) => {
            let file = File::create(path).map_err(CliError::io(format!("creating {}", path.display())))?;
            write_csv(&records, file)?;
        }
        None => write_csv(&records, out)?,
    }
    Ok(())
}

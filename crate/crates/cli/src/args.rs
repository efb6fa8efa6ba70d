use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sqdopt_core::Method;

#[derive(Debug, Parser)]
#[command(name = "sqdopt", version, about = "Sampled quantum diagonalization experiments")]
pub struct Cli {
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Summarize an FCIDUMP file and its qubit Hamiltonian.
    Parse(ParseArgs),
    /// Group Pauli terms into measurement bases and print the plan as CSV.
    Plan(PlanArgs),
    /// Run methods on one fixture and write result artifacts.
    Optimize(OptimizeArgs),
    /// Energy of stored ansatz parameters.
    Evaluate(EvaluateArgs),
    /// Run methods across fixtures and seeds; CSV of error statistics.
    Sweep(SweepArgs),
    /// Time optimization steps per method and fixture.
    Benchmark(BenchmarkArgs),
    /// Tabulate result.json files by fixture and method.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long)]
    pub fcidump: PathBuf,
    /// Orbitals to freeze, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub freeze: Vec<usize>,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[command(flatten)]
    pub fixture: FixtureArgs,
    /// Print JSON instead of key: value lines.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub fixture: FixtureArgs,
    /// Mark the bases a budget of k would select.
    #[arg(long)]
    pub k: Option<usize>,
}

/// Settings shared by every command that runs methods. Unset flags keep the
/// config file or built-in value.
#[derive(Debug, Args, Default)]
pub struct RunOverrides {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub rho_beg: Option<f64>,
    #[arg(long)]
    pub rho_end: Option<f64>,
    #[arg(long)]
    pub layers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// Experiment TOML; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub fcidump: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub freeze: Option<Vec<usize>>,
    #[arg(long = "method", visible_alias = "methods", value_delimiter = ',')]
    pub methods: Option<Vec<Method>>,
    #[arg(long = "seed", visible_alias = "seeds", value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub fci_reference: Option<f64>,
    /// Defaults to the config value, then SQDOPT_OUTPUT_DIR, then ./results.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunOverrides,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// A result.json written by optimize, or a JSON array of parameters.
    #[arg(long)]
    pub params: String,
    /// Required with a bare parameter array.
    #[arg(long)]
    pub fcidump: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub freeze: Option<Vec<usize>>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub fci_reference: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Fixtures named `<label>_<bond length>.fcidump`.
    #[arg(long, required = true, num_args = 1..)]
    pub fcidump: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub freeze: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "vqe,sqdopt")]
    pub methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seeds: Vec<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunOverrides,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub fcidump: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub freeze: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "vqe,sqdopt,fci")]
    pub methods: Vec<Method>,
    /// Optimizer steps timed per run.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(10..))]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub shots: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(required = true, num_args = 1..)]
    pub results: Vec<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn method_lists_parse() {
        let cli = Cli::try_parse_from(["sqdopt", "optimize", "--fcidump", "a", "--method", "vqe,partial-vqe", "--seed", "1,2"]).unwrap();
        let Command::Optimize(o) = cli.command else { panic!() };
        assert_eq!(o.methods.unwrap(), vec![Method::Vqe, Method::PartialVqe]);
        assert_eq!(o.seeds.unwrap(), vec![1, 2]);
    }

    #[test]
    fn short_benchmarks_are_rejected() {
        assert!(Cli::try_parse_from(["sqdopt", "benchmark", "--fcidump", "a", "--steps", "9"]).is_err());
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use filmspec::verify::Suite;

#[derive(Debug, Parser)]
#[command(
    name = "filmspec",
    version,
    about = "Spectral simulator and analysis toolkit for a fourth-order thin-film equation on the torus",
    after_help = "Set FILMSPEC_THREADS to cap the number of worker threads.\n\
                  Exit codes: 0 success, 1 usage or config error, 2 runtime stop."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a run configuration and write norms, snapshots and a manifest.
    Simulate(SimulateArgs),
    /// Smallness constants, parameter conditions and stability verdicts.
    Conditions(ConditionsArgs),
    /// Evaluate conditions and stability over a parameter grid.
    Sweep(SweepArgs),
    /// Run randomized inequality and consistency checks.
    Verify(VerifyArgs),
    /// Linear growth rates of the Fourier modes.
    Dispersion(DispersionArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Run configuration JSON, or a manifest written by an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `out_dir` in the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the manifest instead of a text summary.
    #[arg(long)]
    pub json: bool,
    /// Seed for random initial data; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ConditionsArgs {
    #[arg(long, required_unless_present = "config", allow_negative_numbers = true)]
    pub c1: Option<f64>,
    #[arg(long, required_unless_present = "config", allow_negative_numbers = true)]
    pub c2: Option<f64>,
    /// Wiener norm of the initial perturbation, in [0, 1).
    #[arg(long, allow_negative_numbers = true)]
    pub s0: f64,
    /// Physical parameters JSON (CGS); replaces --c1, --c2 and --thickness-ratio.
    /// `u0_mass` is the mean film height in cm, used as given.
    #[arg(long, conflicts_with_all = ["c1", "c2", "thickness_ratio"])]
    pub config: Option<PathBuf>,
    /// Mean film thickness over `d`, for the classical thickness criterion.
    #[arg(long, default_value_t = 0.0)]
    pub thickness_ratio: f64,
    /// Largest lattice wavenumber scanned for growing modes.
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(i64).range(1..))]
    pub kmax: i64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep configuration JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Directory for `sweep.csv`; the table goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; overrides `jobs` in the config.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// One of all, spectral, model, analysis.
    #[arg(long, default_value = "all", value_parser = parse_suite)]
    pub suite: Suite,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Random trials per check.
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Multiplies the gradient-lemma constants; values below 1 make the check fail.
    #[arg(long, hide = true, default_value_t = 1.0)]
    pub lemma_scale: f64,
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub c1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub c2: f64,
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(i64).range(1..))]
    pub kmax: i64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub dim: u8,
    #[arg(long)]
    pub json: bool,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|e| e.to_string())
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
    fn zero_trials_and_unknown_suite_are_rejected() {
        assert!(Cli::try_parse_from(["filmspec", "verify", "--trials", "0"]).is_err());
        assert!(Cli::try_parse_from(["filmspec", "verify", "--suite", "bogus"]).is_err());
        let ok = Cli::try_parse_from(["filmspec", "verify", "--suite", "analysis"]).unwrap();
        match ok.command {
            Command::Verify(v) => {
                assert_eq!(v.suite, Suite::Analysis);
                assert_eq!(v.seed, 42);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conditions_needs_coefficients_or_config() {
        assert!(Cli::try_parse_from(["filmspec", "conditions", "--s0", "0.1"]).is_err());
        assert!(Cli::try_parse_from(["filmspec", "conditions", "--c1", "0.5", "--c2", "1", "--s0", "0"]).is_ok());
        assert!(Cli::try_parse_from([
            "filmspec", "conditions", "--config", "p.json", "--c1", "0.5", "--s0", "0"
        ])
        .is_err());
    }

    #[test]
    fn jobs_must_be_positive() {
        assert!(Cli::try_parse_from(["filmspec", "sweep", "--config", "s.json", "--jobs", "0"]).is_err());
    }
}

//! `reldrift` command line: discover relations on baseline data, score field
//! data for drift, inject simulated drift, and run drift sweeps.
//!
//! Exit codes: 0 success, 1 I/O or parse failure, 2 no strong relation found
//! (only with `--require-strong`), 3 drift detected on a strong relation,
//! 4 no profile relation applies to the field data, 5 invalid arguments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reldrift::{
    build_profile, load_csv, load_profile, save_profile, score_drift, CsvOptions, DataTable,
    DiscoveryParams, DriftKind, SimulationSpec, SweepConfig, UnfairRoles,
};

mod exit;
mod summary;

use exit::{CliError, Outcome};

#[derive(Debug, Parser)]
#[command(name = "reldrift", version, about = "Relation-based drift detection for numeric tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Number of most-correlated features per relation.
    #[arg(long, global = true, default_value_t = 2)]
    k: usize,

    /// Maximum total polynomial degree.
    #[arg(long, global = true, default_value_t = 2)]
    l: u32,

    /// Minimum R^2 for a relation to count as strong.
    #[arg(long = "r2-threshold", global = true, default_value_t = 0.9)]
    r2_threshold: f64,

    /// Drift decision threshold on the 2 ln(BF) scale.
    #[arg(long = "bf-threshold", global = true, default_value_t = reldrift::DEFAULT_THRESHOLD_2LNBF)]
    bf_threshold: f64,

    /// Seed for every random step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Drop CSV rows with missing or non-numeric cells instead of failing.
    #[arg(long = "drop-incomplete", global = true)]
    drop_incomplete: bool,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Find relations on a baseline CSV and write a profile.
    Discover {
        csv: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Only use these columns.
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
        /// Exit with code 2 when no strong relation is found.
        #[arg(long)]
        require_strong: bool,
        /// Leave the profile's creation time empty.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Score a field CSV against a profile and write a drift report.
    Score {
        profile: PathBuf,
        csv: PathBuf,
        /// Report path; `.csv` writes one finding per row, anything else JSON.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Inject drift into a CSV.
    Simulate {
        csv: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        drift: DriftArgs,
        /// Permuted proportion per column, in [0, 1].
        #[arg(long)]
        r: Option<f64>,
        /// Unfairness level, >= 0.
        #[arg(long)]
        u: Option<f64>,
        /// Mean of the regenerated target; defaults to the original column's.
        #[arg(long = "target-mean", requires = "target_std")]
        target_mean: Option<f64>,
        /// Population std of the regenerated target; defaults to the original column's.
        #[arg(long = "target-std", requires = "target_mean")]
        target_std: Option<f64>,
    },
    /// Run a split / discover / inject / score sweep and write CSV results.
    Experiment {
        csv: PathBuf,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[command(flatten)]
        drift: DriftArgs,
        #[arg(long = "r-values", value_delimiter = ',')]
        r_values: Option<Vec<f64>>,
        #[arg(long = "u-values", value_delimiter = ',')]
        u_values: Option<Vec<f64>>,
        /// Explicit seed list; defaults to `--seed` .. `--seed + --n-seeds`.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long = "n-seeds", default_value_t = 10)]
        n_seeds: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Permute,
    Unfair,
}

#[derive(Debug, Args)]
struct DriftArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Target column regenerated by the unfairness injector.
    #[arg(long)]
    target: Option<String>,
    #[arg(long, value_delimiter = ',')]
    relevant: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    sensitive: Option<Vec<String>>,
}

impl DriftArgs {
    fn roles(&self) -> Result<UnfairRoles, CliError> {
        match (&self.target, &self.relevant, &self.sensitive) {
            (Some(t), Some(r), Some(s)) => Ok(UnfairRoles {
                target: t.clone(),
                relevant: r.clone(),
                sensitive: s.clone(),
            }),
            _ => Err(CliError::invalid(
                "--kind unfair needs --target, --relevant and --sensitive",
            )),
        }
    }
}

impl Cli {
    fn params(&self) -> DiscoveryParams {
        DiscoveryParams {
            k: self.k,
            l: self.l,
            r2_threshold: self.r2_threshold,
        }
    }

    fn csv_options(&self, columns: Option<Vec<String>>) -> CsvOptions {
        CsvOptions {
            drop_incomplete_rows: self.drop_incomplete,
            select_columns: columns,
        }
    }

    fn check_flags(&self) -> Result<(), CliError> {
        if self.k == 0 {
            return Err(CliError::invalid("--k must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.r2_threshold) {
            return Err(CliError::invalid("--r2-threshold must lie in [0, 1]"));
        }
        if self.bf_threshold.is_nan() {
            return Err(CliError::invalid("--bf-threshold must be a number"));
        }
        Ok(())
    }
}

fn read_table(path: &Path, opts: &CsvOptions) -> Result<DataTable, CliError> {
    load_csv(path, opts).map_err(CliError::io)
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    cli.check_flags()?;
    match &cli.command {
        Command::Discover {
            csv,
            out,
            columns,
            require_strong,
            no_timestamp,
        } => {
            let table = read_table(csv, &cli.csv_options(columns.clone()))?;
            let created_at = (!no_timestamp).then(|| chrono::Utc::now().to_rfc3339());
            let profile = build_profile(&table, cli.params(), created_at).map_err(CliError::from_core)?;
            save_profile(&profile, out).map_err(CliError::io)?;
            print!("{}", summary::relations(&profile));
            if *require_strong && profile.relations.strong.is_empty() {
                return Ok(Outcome::NoStrongRelations);
            }
            Ok(Outcome::Success)
        }
        Command::Score { profile, csv, out } => {
            let profile = load_profile(profile).map_err(CliError::io)?;
            let table = read_table(csv, &cli.csv_options(None))?;
            let report = score_drift(&profile, &table, cli.bf_threshold).map_err(CliError::from_core)?;
            report.save(out).map_err(CliError::io)?;
            print!("{}", summary::report(&report));
            if report.findings.is_empty() {
                eprintln!("error: no profile relation applies to {}", csv.display());
                Ok(Outcome::SchemaMismatch)
            } else if report.any_strong_drift {
                Ok(Outcome::Drift)
            } else {
                Ok(Outcome::Success)
            }
        }
        Command::Simulate {
            csv,
            out,
            drift,
            r,
            u,
            target_mean,
            target_std,
        } => {
            let (kind, param, roles) = match drift.kind {
                KindArg::Permute => (
                    DriftKind::RowPermutation,
                    r.ok_or_else(|| CliError::invalid("--kind permute needs --r"))?,
                    None,
                ),
                KindArg::Unfair => (
                    DriftKind::Unfairness,
                    u.ok_or_else(|| CliError::invalid("--kind unfair needs --u"))?,
                    Some(drift.roles()?),
                ),
            };
            let spec = SimulationSpec {
                kind,
                param,
                seed: cli.seed,
                roles,
            };
            let table = read_table(csv, &cli.csv_options(None))?;
            spec.validate(&table).map_err(CliError::spec)?;
            let drifted = match (&spec.roles, target_mean, target_std) {
                (Some(roles), Some(mean), Some(std)) => {
                    if !(std.is_finite() && *std > 0.0 && mean.is_finite()) {
                        return Err(CliError::invalid("--target-std must be positive and finite"));
                    }
                    reldrift::sim::gen_unfair_target_scaled(&table, roles, spec.param, spec.seed, *mean, *std)
                        .and_then(|y| table.with_column(&roles.target, y))
                }
                (None, Some(_), _) => {
                    return Err(CliError::invalid("--target-mean/--target-std apply to --kind unfair only"))
                }
                _ => spec.apply(&table),
            }
            .map_err(CliError::spec)?;
            drifted.write_csv(out).map_err(CliError::io)?;
            println!(
                "wrote {} rows x {} columns to {}",
                drifted.n_rows(),
                drifted.n_cols(),
                out.display()
            );
            Ok(Outcome::Success)
        }
        Command::Experiment {
            csv,
            out_dir,
            drift,
            r_values,
            u_values,
            seeds,
            n_seeds,
        } => {
            let seeds: Vec<u64> = match seeds {
                Some(s) => s.clone(),
                None => (0..*n_seeds).map(|i| cli.seed.wrapping_add(i)).collect(),
            };
            let config = SweepConfig {
                params: cli.params(),
                threshold_2lnbf: cli.bf_threshold,
            };
            let table = read_table(csv, &cli.csv_options(None))?;
            let result = match drift.kind {
                KindArg::Permute => {
                    let r = r_values
                        .as_ref()
                        .ok_or_else(|| CliError::invalid("--kind permute needs --r-values"))?;
                    reldrift::run_permutation_sweep(&table, config, r, &seeds)
                }
                KindArg::Unfair => {
                    let u = u_values
                        .as_ref()
                        .ok_or_else(|| CliError::invalid("--kind unfair needs --u-values"))?;
                    reldrift::run_unfairness_sweep(&table, &drift.roles()?, config, u, &seeds)
                }
            }
            .map_err(CliError::spec)?;
            result.write_csvs(out_dir).map_err(CliError::io)?;
            print!("{}", summary::sweep(&result));
            Ok(Outcome::Success)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(Outcome::InvalidSpec.code()),
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match run(cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.outcome.code())
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use log::warn;

use mailbench::audit::audit_files;
use mailbench::plot::{curves, render_svg};
use mailbench::records::read_csv;
use mailbench::{formula_suite, run_experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "mailbench", version, about = "Imitation learning experiments on tabular zero-sum Markov games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write `<experiment>.csv` and a summary.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of seeds.
        #[arg(long)]
        n_seeds: Option<usize>,
        /// Override the query-budget checkpoints, comma separated.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Option<Vec<u64>>,
        /// Fill the wall_ms column; the CSV is then no longer reproducible.
        #[arg(long)]
        timing: bool,
    },
    /// Render one SVG per environment from a results CSV.
    Plot {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the closed-form formulas against exact solvers.
    Formulas,
    /// Concentrability report for a game, expert pair and data distribution.
    Audit {
        game: PathBuf,
        experts: PathBuf,
        rho: PathBuf,
        /// Also write the per-state table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            n_seeds,
            checkpoints,
            timing,
        } => {
            let mut cfg = ExperimentConfig::from_path(&config)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(n) = n_seeds {
                cfg.n_seeds = n;
            }
            if let Some(c) = checkpoints {
                cfg.checkpoints = c;
            }
            cfg.timing |= timing;
            cfg.validate()?;
            let output = run_experiment(&cfg)?;
            output
                .write(&out)
                .with_context(|| format!("writing into {}", out.display()))?;
            println!(
                "wrote {} rows to {}",
                output.records.len().max(output.csv.lines().count().saturating_sub(1)),
                out.join(format!("{}.csv", cfg.experiment.name())).display()
            );
            if cfg.experiment == mailbench::ExperimentId::FormulaSuite {
                return Ok(output.summary.extras.get("passed") == output.summary.extras.get("checks"));
            }
            Ok(true)
        }
        Command::Plot { csv, out } => {
            let file = std::fs::File::open(&csv).with_context(|| format!("opening {}", csv.display()))?;
            let records = read_csv(file).with_context(|| format!("parsing {}", csv.display()))?;
            let per_env = curves(&records);
            if per_env.is_empty() {
                warn!("{} has no rows; writing empty axes", csv.display());
                std::fs::write(&out, render_svg("no data", &[]))?;
                return Ok(true);
            }
            let single = per_env.len() == 1;
            for (env, cs) in &per_env {
                let path = if single {
                    out.clone()
                } else {
                    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
                    out.with_file_name(format!("{stem}-{env}.svg"))
                };
                std::fs::write(&path, render_svg(env, cs))
                    .with_context(|| format!("writing {}", path.display()))?;
                println!("wrote {}", path.display());
            }
            Ok(true)
        }
        Command::Formulas => {
            let report = formula_suite();
            print!("{}", report.to_table());
            Ok(report.all_passed())
        }
        Command::Audit { game, experts, rho, csv } => {
            let report = audit_files(&game, &experts, &rho)?;
            println!("{}", report.to_json());
            if let Some(path) = csv {
                std::fs::write(&path, report.to_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}


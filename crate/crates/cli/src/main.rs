use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use contact_pairs::catalog::list_examples;
use cpairs::config::{example_config, load_config, ConfigError, RunConfig, TaskKind};
use cpairs::report::{render, render_examples, Format};

#[derive(Parser)]
#[command(name = "cpairs", version, about = "Verify contact pairs, linear deformations and Jacobi structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Run configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named built-in example instead of a config file.
    #[arg(long, conflicts_with = "config")]
    example: Option<String>,
    /// Seed for random sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance for every check.
    #[arg(long)]
    tol: Option<f64>,
    /// Comma-separated deformation parameters, e.g. `--t-grid=-1,0.5,2`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    t_grid: Option<Vec<f64>>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run every task of a config file.
    Run(Common),
    /// Cartan class of a 1-form.
    Classify(Common),
    /// Certify a contact pair and solve its Reeb pair.
    VerifyPair(Common),
    /// Linear deformation theorems.
    Deform {
        #[command(flatten)]
        common: Common,
        /// Check the converse direction instead of the forward one.
        #[arg(long, conflicts_with = "single")]
        converse: bool,
        /// Single-form deformation criterion.
        #[arg(long)]
        single: bool,
    },
    /// Jacobi brackets on characteristic leaves.
    Jacobi(Common),
    /// Volume and Reeb residuals along a t grid.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// CSV destination when running an example.
        #[arg(long, default_value = "sweep.csv")]
        csv: PathBuf,
    },
    /// List built-in examples.
    Examples {
        #[arg(long, default_value = "")]
        filter: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn input_error(e: &ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn build(common: &Common, kind: Option<TaskKind>, csv: Option<&Path>) -> Result<RunConfig, ConfigError> {
    let mut config = match (&common.config, &common.example, kind) {
        (Some(path), _, _) => {
            let mut c = load_config(path)?;
            if let Some(k) = kind {
                c.retain_tasks(|t| t == k);
            }
            c
        }
        (None, Some(name), Some(k)) => example_config(k, name, csv)?,
        _ => {
            return Err(ConfigError::Invalid(vec![cpairs::Issue {
                location: "arguments".into(),
                message: match kind {
                    Some(_) => "pass --config PATH or --example NAME".into(),
                    None => "pass --config PATH".into(),
                },
            }]))
        }
    };
    config.apply_overrides(common.seed, common.tol, common.t_grid.as_deref())?;
    if config.tasks.is_empty() {
        return Err(ConfigError::Invalid(vec![cpairs::Issue {
            location: "config".into(),
            message: "no tasks of the requested kind".into(),
        }]));
    }
    Ok(config)
}

fn execute(common: &Common, kind: Option<TaskKind>, csv: Option<&Path>) -> ExitCode {
    let config = match build(common, kind, csv) {
        Ok(c) => c,
        Err(e) => return input_error(&e),
    };
    let report = cpairs::run(&config);
    if let Err(e) = emit(&render(&report, common.format), common.out.as_deref()) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    ExitCode::from(report.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Run(c) => execute(c, None, None),
        Command::Classify(c) => execute(c, Some(TaskKind::Classify), None),
        Command::VerifyPair(c) => execute(c, Some(TaskKind::VerifyPair), None),
        Command::Deform {
            common,
            converse,
            single,
        } => {
            let kind = match (converse, single) {
                (true, _) => TaskKind::DeformConverse,
                (_, true) => TaskKind::SingleDeform,
                _ => TaskKind::DeformForward,
            };
            execute(common, Some(kind), None)
        }
        Command::Jacobi(c) => execute(c, Some(TaskKind::Jacobi), None),
        Command::Sweep { common, csv } => execute(common, Some(TaskKind::Sweep), Some(csv)),
        Command::Examples { filter, format } => {
            print!("{}", render_examples(&list_examples(filter), *format));
            ExitCode::SUCCESS
        }
    }
}

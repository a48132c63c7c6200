use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nslab_cli::config::{FunctionSource, OutputConfig, Overrides};
use nslab_cli::report::{EXIT_CONFIG, EXIT_PASS};
use nslab_cli::{emit_plot_data, run, write_outputs, CheckSpec, CliError, ReportDocument, RunConfig};
use nslab_core::corpus::load_corpus;

/// Numerical checks of subderivatives, subdifferentials and the
/// variational results built on them.
#[derive(Debug, Parser)]
#[command(name = "nslab", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Corpus function to check (replaces the config's function).
    #[arg(long, global = true, conflicts_with = "file")]
    corpus: Option<String>,

    /// DSL file with the function to check (replaces the config's function).
    #[arg(long, global = true)]
    file: Option<PathBuf>,

    /// Check as `name[:key=value;...]`; repeatable. Replaces the config's checks.
    #[arg(long = "check", global = true)]
    checks: Vec<String>,

    /// Directory for report.json and plot files; the report goes to stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Quasirandom stream selector for every sampler.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the checks of a TOML config.
    Run { config: PathBuf },
    /// List the corpus functions.
    List,
    /// Write the CSV trace of a quantity from an existing report.
    Plot {
        report: PathBuf,
        quantity: String,
        output: PathBuf,
    },
}

fn build_config(cli: &Cli, base: Option<RunConfig>) -> Result<RunConfig, CliError> {
    let mut cfg = base.unwrap_or(RunConfig {
        function: FunctionSource { corpus: None, file: None },
        checks: Vec::new(),
        overrides: Overrides::default(),
        output: OutputConfig::default(),
    });
    if cli.corpus.is_some() || cli.file.is_some() {
        cfg.function = FunctionSource {
            corpus: cli.corpus.clone(),
            file: cli.file.clone(),
        };
    }
    if !cli.checks.is_empty() {
        cfg.checks = cli.checks.iter().map(|c| CheckSpec::parse(c)).collect::<Result<_, _>>()?;
    }
    if cli.seed.is_some() {
        cfg.overrides.seed = cli.seed;
    }
    if cli.out.is_some() {
        cfg.output.dir = cli.out.clone();
    }
    Ok(cfg)
}

fn execute(cli: &Cli, base: Option<RunConfig>) -> Result<i32, CliError> {
    let cfg = build_config(cli, base)?;
    let report = run(&cfg, cli.jobs)?;
    for c in &report.checks {
        eprintln!("[{}] {}: {} ({})", c.index, c.name, c.verdict.as_str(), c.outcome);
    }
    match &report.config.output.dir {
        Some(dir) => write_outputs(&report, dir)?,
        None => print!("{}", report.to_json()?),
    }
    Ok(report.exit_code)
}

fn main_inner(cli: Cli) -> Result<i32, CliError> {
    match &cli.command {
        Some(Command::Run { config }) => {
            let base = RunConfig::from_path(config)?;
            execute(&cli, Some(base))
        }
        Some(Command::List) => {
            for e in load_corpus() {
                println!("{}\t{}", e.id, e.citations().join(","));
            }
            Ok(EXIT_PASS)
        }
        Some(Command::Plot { report, quantity, output }) => {
            let text = std::fs::read_to_string(report).map_err(|e| CliError::io(report, e))?;
            emit_plot_data(&ReportDocument::from_json(&text)?, quantity, output)?;
            Ok(EXIT_PASS)
        }
        None => execute(&cli, None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match main_inner(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("nslab: {}", e);
            let code = match e {
                CliError::Core(nslab_core::Error::SearchFailure { .. }) => nslab_cli::report::EXIT_SEARCH_FAILURE,
                _ => EXIT_CONFIG,
            };
            ExitCode::from(code as u8)
        }
    }
}

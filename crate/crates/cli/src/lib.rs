//! Batch driver: runs configured checks on one function and produces a
//! JSON report plus plot-ready CSV traces.

pub mod checks;
pub mod config;
pub mod error;
pub mod report;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

pub use config::{CheckName, CheckSpec, RunConfig};
pub use error::{CliError, Result};
pub use report::{emit_plot_data, ReportDocument, Verdict};

use report::{exit_code, summarize, FunctionInfo, SCHEMA_VERSION};

/// Runs every check of `config` on a worker pool of `jobs` threads (the
/// rayon default when `None`). Results keep the declaration order.
pub fn run(config: &RunConfig, jobs: Option<usize>) -> Result<ReportDocument> {
    let mut config = config.clone();
    config.overrides.apply_seed();
    let func = config.resolve()?;
    let timings = config.output.timings;
    let work = || {
        config
            .checks
            .par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let start = Instant::now();
                let mut r = checks::run_check(i, &func, spec, &config.overrides);
                if timings {
                    r.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
                }
                r
            })
            .collect::<Vec<_>>()
    };
    let results = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {} workers: {}", n, e)))?
            .install(work),
        None => work(),
    };
    Ok(ReportDocument {
        schema_version: SCHEMA_VERSION,
        artifact_version: env!("CARGO_PKG_VERSION").to_string(),
        function: FunctionInfo {
            corpus_id: func.id.clone(),
            source: func.source.clone(),
            dim: func.spec.dim,
            convex: func.spec.convex,
            lipschitz: func.spec.lipschitz,
        },
        summary: summarize(&results),
        exit_code: exit_code(&results),
        checks: results,
        config,
    })
}

/// Writes `report.json` and one `<quantity>.csv` per configured plot.
pub fn write_outputs(report: &ReportDocument, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    report.write(&dir.join("report.json"))?;
    for q in &report.config.output.plots {
        emit_plot_data(report, q, &dir.join(format!("{}.csv", q)))?;
    }
    Ok(())
}

use std::fs;
use std::process::ExitCode;

use anyhow::anyhow;
use ssrcps_core::io::write_json;
use ssrcps_core::sim::{run_coverage_experiment, ExperimentConfig};

use crate::args::ExperimentArgs;
use crate::failure::{CliResult, Context, Failure};

pub fn run(args: &ExperimentArgs, seed: Option<u64>) -> CliResult<ExitCode> {
    let mut config = ExperimentConfig::from_path(&args.config).map_err(|e| {
        Failure::usage(anyhow::Error::from(e).context(format!("config {}", args.config.display())))
    })?;
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(seed) = seed {
        config.scenario.master_seed = seed;
    }
    config.validate().map_err(|e| Failure::usage(e.into()))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Failure::usage(anyhow!("--jobs: {e}")))?;
    let run = pool.install(|| run_coverage_experiment(&config))?;
    let report = &run.report;

    fs::create_dir_all(&args.output_dir).map_err(|e| {
        Failure::data(
            anyhow::Error::from(e).context(format!("creating {}", args.output_dir.display())),
        )
    })?;
    let json_path = args.output_dir.join(format!("{}.json", config.name));
    let csv_path = args.output_dir.join(format!("{}.csv", config.name));
    write_json(report, &json_path).context_with(|| format!("writing {}", json_path.display()))?;
    let csv = report.to_csv()?;
    fs::write(&csv_path, csv).map_err(|e| {
        Failure::data(anyhow::Error::from(e).context(format!("writing {}", csv_path.display())))
    })?;

    for r in &report.reports {
        let mut flags = String::new();
        if r.asymptotic {
            flags.push_str(" [asymptotic]");
        }
        if r.unsafe_guarantee {
            flags.push_str(" [INVALID guarantee]");
        }
        println!(
            "{:<22} violation_rate {:.4} (bound {:.4})  mean_true_risk {:.4}  std {:.4}  abstain {:.3}{flags}",
            r.method, r.violation_rate, r.violation_bound, r.mean_true_risk, r.std_true_risk, r.abstain_rate
        );
    }
    eprintln!("wrote {} and {}", json_path.display(), csv_path.display());
    Ok(ExitCode::SUCCESS)
}

mod config;
mod jobs;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use ineqlab::report::format_real;
use jobs::{Job, Outcome, Verdict};

#[derive(Parser)]
#[command(name = "ineqlab", version, about = "Checks weighted Poincaré, transport-cost and concentration inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every job of a configuration file.
    Run {
        config: PathBuf,
        /// Jobs run concurrently on this many threads.
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long)]
        verbose: bool,
    },
}

const SEED_VAR: &str = "INEQLAB_SEED_OVERRIDE";

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, workers, out_dir, verbose } => ExitCode::from(run(&config, workers, &out_dir, verbose)),
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt_real(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

fn run(config: &Path, workers: usize, out_dir: &Path, verbose: bool) -> u8 {
    let text = match fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return 1;
        }
    };
    let seed_override = match std::env::var(SEED_VAR) {
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(s) => Some(s),
            Err(_) => {
                eprintln!("error: {SEED_VAR} must be a non-negative integer, got '{v}'");
                return 1;
            }
        },
        Err(_) => None,
    };
    let sections = match config::parse(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {}:{}:{}: {}", config.display(), e.line, e.column, e.message);
            return 1;
        }
    };
    let mut resolved: Vec<Job> = Vec::with_capacity(sections.len());
    for sec in &sections {
        match jobs::resolve(sec, seed_override) {
            Ok(j) => resolved.push(j),
            Err(e) => {
                eprintln!("error: {}:{}:{}: job '{}': {}", config.display(), e.line, e.column, sec.name, e.message);
                return 1;
            }
        }
    }
    let mut outputs: Vec<&str> = resolved.iter().map(|j| j.output.as_str()).collect();
    outputs.sort_unstable();
    if let Some(w) = outputs.windows(2).find(|w| w[0] == w[1]) {
        eprintln!("error: two jobs write the same report '{}'", w[0]);
        return 1;
    }
    if let Err(e) = fs::create_dir_all(out_dir) {
        eprintln!("error: cannot create {}: {e}", out_dir.display());
        return 1;
    }
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start workers: {e}");
            return 1;
        }
    };
    let results: Vec<Result<Outcome, ineqlab::Error>> = pool.install(|| {
        resolved
            .par_iter()
            .map(|job| {
                let start = Instant::now();
                if verbose {
                    eprintln!("[{}] {} started", job.name, job.kind);
                }
                let r = jobs::run(job);
                if verbose {
                    let status = match &r {
                        Ok(o) => o.verdict.as_str().to_string(),
                        Err(e) => format!("error: {e}"),
                    };
                    eprintln!("[{}] {} in {:.2?}", job.name, status, start.elapsed());
                }
                r
            })
            .collect()
    });

    let mut summary = String::from("job,kind,measure,weight,verdict,bracket_low,bracket_high,estimate,report\n");
    let (mut any_error, mut any_fail, mut any_inconclusive) = (false, false, false);
    for (job, result) in resolved.iter().zip(results) {
        let (verdict, report, csv, bracket, estimate) = match result {
            Ok(o) => (o.verdict, o.report, o.csv, o.bracket, o.estimate),
            Err(e) => {
                eprintln!("error: job '{}': {e}", job.name);
                (Verdict::Error, jobs::error_report(job, &e), None, None, None)
            }
        };
        match verdict {
            Verdict::Error => any_error = true,
            Verdict::Fail => any_fail = true,
            Verdict::Inconclusive => any_inconclusive = true,
            Verdict::Pass => {}
        }
        let path = out_dir.join(&job.output);
        if let Err(e) = fs::write(&path, report + "\n") {
            eprintln!("error: cannot write {}: {e}", path.display());
            any_error = true;
        }
        if let Some(csv) = csv {
            let p = path.with_extension("csv");
            if let Err(e) = fs::write(&p, csv) {
                eprintln!("error: cannot write {}: {e}", p.display());
                any_error = true;
            }
        }
        summary.push_str(
            &[
                csv_field(&job.name),
                job.kind.clone(),
                csv_field(&job.measure_spec),
                csv_field(&job.weight.descriptor()),
                verdict.as_str().to_string(),
                opt_real(bracket.map(|b| b.0)),
                opt_real(bracket.map(|b| b.1)),
                opt_real(estimate),
                csv_field(&job.output),
            ]
            .join(","),
        );
        summary.push('\n');
    }
    let summary_path = out_dir.join("summary.csv");
    if let Err(e) = fs::write(&summary_path, summary) {
        eprintln!("error: cannot write {}: {e}", summary_path.display());
        return 1;
    }
    if any_error {
        1
    } else if any_fail {
        2
    } else if any_inconclusive {
        3
    } else {
        0
    }
}

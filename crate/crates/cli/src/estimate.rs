use std::fs::{File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use distimator::estimator::{estimate_bell, estimate_werner_in, WERNER_BRACKET};
use distimator::experiment::read_logs;
use distimator::{EstimateReport, ExperimentLog, NoiseModel, Protocol};
use serde::{Deserialize, Serialize};

use crate::config::{per_channel, resolve, NoiseSpec};
use crate::error::CliError;
use crate::output::{num, opt, Sink};

/// Report columns shared by `estimate --csv` and the sweep tables.
pub const REPORT_COLUMNS: [&str; 12] = [
    "w_hat", "q1_hat", "q2_hat", "q3_hat", "q4_hat", "x1_hat", "x2_hat", "x3_hat", "delta",
    "valid", "clamped", "consumed",
];

pub fn report_fields(r: &EstimateReport) -> Vec<String> {
    let mut row = vec![opt(r.w_hat)];
    row.extend(r.q_hat.iter().map(|&v| num(v)));
    match r.x_hat {
        Some(x) => row.extend(x.iter().map(|&v| num(v))),
        None => row.extend(std::iter::repeat_n(String::new(), 3)),
    }
    row.push(num(r.delta));
    row.push(r.valid.to_string());
    row.push(r.any_clamped().to_string());
    row.push(num(r.consumed));
    row
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// One protocol-a log; estimates the Werner parameter.
    Werner,
    /// Logs for protocols a, b and c; estimates all Bell weights.
    Bell,
}

/// Estimate a state from simulation logs. Prints a JSON report.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[command(after_help = concat!(
    "CSV columns (--csv): w_hat,q1_hat,q2_hat,q3_hat,q4_hat,x1_hat,x2_hat,x3_hat,",
    "delta,valid,clamped,consumed\n\n",
    "Logs carry no noise model; pass the one used for the run."
))]
pub struct EstimateArgs {
    /// JSON file with any of these options; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Log files; records are taken in file order
    pub logs: Option<Vec<PathBuf>>,
    /// Estimation mode [default: werner]
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Error bound on the Werner parameter [default: 0.01]
    #[arg(long)]
    pub eps_w: Option<f64>,
    /// Error bounds on the intermediates, one or three values [default: 0.01]
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Werner search interval lo,hi [default: 0,2/3]
    #[arg(long, value_delimiter = ',')]
    pub bracket: Option<Vec<f64>>,
    /// Append a CSV row to this file, with a header if the file is new
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    #[serde(default)]
    pub noise: NoiseSpec,
}

pub fn load_logs(paths: &[PathBuf], model: &NoiseModel) -> Result<Vec<ExperimentLog>, CliError> {
    let mut logs = Vec::new();
    for path in paths {
        let file = File::open(path).map_err(|e| CliError::io(path, e))?;
        let records = read_logs(BufReader::new(file), model)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        logs.extend(records);
    }
    Ok(logs)
}

fn pick(logs: &[ExperimentLog], p: Protocol) -> Result<&ExperimentLog, CliError> {
    let mut found = logs.iter().filter(|l| l.protocol == p);
    match (found.next(), found.next()) {
        (Some(log), None) => Ok(log),
        (None, _) => Err(CliError::Usage(format!(
            "bell mode needs a log for protocol {p}"
        ))),
        (Some(_), Some(_)) => Err(CliError::Usage(format!(
            "more than one log for protocol {p}"
        ))),
    }
}

pub fn estimate(args: &EstimateArgs, logs: &[ExperimentLog]) -> Result<EstimateReport, CliError> {
    match args.mode.unwrap_or(Mode::Werner) {
        Mode::Werner => {
            let [log] = logs else {
                return Err(CliError::Usage(format!(
                    "werner mode takes exactly one log record, got {}",
                    logs.len()
                )));
            };
            let bracket = match args.bracket.as_deref() {
                None => WERNER_BRACKET,
                Some(&[lo, hi]) => (lo, hi),
                Some(other) => {
                    return Err(CliError::Usage(format!(
                        "--bracket takes two values, got {}",
                        other.len()
                    )))
                }
            };
            Ok(estimate_werner_in(
                log,
                args.eps_w.unwrap_or(0.01),
                bracket,
            )?)
        }
        Mode::Bell => {
            if logs.len() != 3 {
                return Err(CliError::Usage(format!(
                    "bell mode takes three log records (a, b, c), got {}",
                    logs.len()
                )));
            }
            let eps = per_channel(args.eps.as_deref().unwrap_or(&[0.01]), "eps")?;
            let [a, b, c] = Protocol::ALL.map(|p| pick(logs, p));
            Ok(estimate_bell([a?, b?, c?], eps)?)
        }
    }
}

fn append_row(path: &Path, report: &EstimateReport) -> Result<(), CliError> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::io(path, e))?;
    let fresh = file.metadata().map_err(|e| CliError::io(path, e))?.len() == 0;
    let mut w = csv::Writer::from_writer(file);
    if fresh {
        w.write_record(REPORT_COLUMNS)?;
    }
    w.write_record(report_fields(report))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

pub fn run(args: EstimateArgs) -> Result<(), CliError> {
    let config = args.config.clone();
    let args = resolve(args, config.as_deref())?;
    let model = args.noise.model()?;
    let paths = args.logs.clone().unwrap_or_default();
    if paths.is_empty() {
        return Err(CliError::Usage("no log files given".into()));
    }
    let logs = load_logs(&paths, &model)?;
    let report = estimate(&args, &logs)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut out = Sink::open(None)?;
    writeln!(out, "{json}").map_err(|e| out.error(e))?;
    out.finish()?;
    if let Some(path) = &args.csv {
        append_row(path, &report)?;
    }
    Ok(())
}

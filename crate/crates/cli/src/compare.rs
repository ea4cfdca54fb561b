use std::path::PathBuf;

use clap::Args;
use distimator::estimator::{deviation_thresholds, required_rounds, tomography_werner_samples};
use distimator::protocols::QuadraticForm;
use distimator::{Parameterization, Protocol, SuccessCurve};
use serde::{Deserialize, Serialize};

use crate::config::{grid, resolve, Range};
use crate::error::CliError;
use crate::output::{num, opt, Sink};

pub const COLUMNS: [&str; 10] = [
    "w",
    "eps_w",
    "delta",
    "survival",
    "p",
    "required_rounds",
    "consumed",
    "distilled",
    "tomography_n",
    "distillation_cheaper",
];

/// Pairs a Werner estimate consumes by distillation versus by tomography.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[command(after_help = concat!(
    "CSV columns: w,eps_w,delta,survival,p,required_rounds,consumed,distilled,",
    "tomography_n,distillation_cheaper\n\n",
    "Distillation uses protocol a with perfect devices and a control copy that\n",
    "survives memory depolarization with mean probability --survival. For each w,\n",
    "required_rounds is the smallest N meeting --delta, consumed = (2 - p) N and\n",
    "distilled = p N. The w where distillation stops being cheaper is reported on\n",
    "stderr for every eps_w."
))]
pub struct CompareArgs {
    /// JSON file with any of these options; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Werner parameters [default: 0,0.01,...,0.65]
    #[arg(long, value_delimiter = ',', conflicts_with = "w_range")]
    pub w: Option<Vec<f64>>,
    /// Werner parameters as start:stop:count
    #[arg(long)]
    pub w_range: Option<Range>,
    /// Error bounds [default: 0.005,0.01,0.02]
    #[arg(long, value_delimiter = ',')]
    pub eps_w: Option<Vec<f64>>,
    /// Failure-probability target [default: 0.01]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Mean memory survival probability of the control copy, in (0, 1] [default: 1]
    #[arg(long)]
    pub survival: Option<f64>,
    /// CSV file [default: stdout]
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

struct Row {
    w: f64,
    required: Option<u64>,
    p: f64,
    tom: u64,
}

impl Row {
    fn cheaper(&self) -> bool {
        self.required
            .is_some_and(|n| (2.0 - self.p) * (n as f64) < self.tom as f64)
    }
}

/// Success curve of protocol A with a depolarized control copy.
fn depolarized_curve(survival: f64) -> SuccessCurve {
    SuccessCurve {
        protocol: Protocol::A,
        form: QuadraticForm {
            slope: survival,
            constant: 0.25 * (1.0 + survival),
        },
        parameterization: Parameterization::Werner,
    }
}

fn crossover(eps: f64, rows: &[Row]) -> String {
    let Some(first) = rows.iter().position(Row::cheaper) else {
        return format!("eps_w={eps}: distillation is never cheaper on this grid");
    };
    match rows[first..].iter().position(|r| !r.cheaper()) {
        None => format!(
            "eps_w={eps}: distillation is cheaper from w={} to the end of the grid",
            rows[first].w
        ),
        Some(k) => format!(
            "eps_w={eps}: distillation is cheaper for w in [{}, {}], crossover before w={}",
            rows[first].w,
            rows[first + k - 1].w,
            rows[first + k].w
        ),
    }
}

pub fn run(args: CompareArgs) -> Result<(), CliError> {
    let config = args.config.clone();
    let args = resolve(args, config.as_deref())?;
    let default_w: Vec<f64> = (0..=65).map(|k| k as f64 / 100.0).collect();
    let ws = grid(&args.w, &args.w_range, &default_w);
    let eps_list = args
        .eps_w
        .clone()
        .unwrap_or_else(|| vec![0.005, 0.01, 0.02]);
    let delta = args.delta.unwrap_or(0.01);
    let survival = args.survival.unwrap_or(1.0);
    if !(survival > 0.0 && survival <= 1.0) {
        return Err(CliError::Usage(format!(
            "--survival must be in (0, 1], got {survival}"
        )));
    }
    for &w in &ws {
        if !(0.0..=1.0).contains(&w) {
            return Err(CliError::Usage(format!("w must be in [0, 1], got {w}")));
        }
    }
    let curve = depolarized_curve(survival);
    let sink = Sink::open(args.output.as_deref())?;
    let mut out = csv::Writer::from_writer(sink);
    out.write_record(COLUMNS)?;
    for &eps in &eps_list {
        let tom = tomography_werner_samples(delta, eps)?;
        let rows: Vec<Row> = ws
            .iter()
            .map(|&w| {
                let p = curve.eval(w);
                let (l, r) = deviation_thresholds(&curve, p, w, eps);
                let required = required_rounds(l, r, delta).ok();
                Row {
                    w,
                    required,
                    p,
                    tom,
                }
            })
            .collect();
        for row in &rows {
            let n = row.required.map(|n| n as f64);
            out.write_record([
                num(row.w),
                num(eps),
                num(delta),
                num(survival),
                num(row.p),
                opt(row.required),
                opt(n.map(|n| num((2.0 - row.p) * n))),
                opt(n.map(|n| num(row.p * n))),
                row.tom.to_string(),
                row.cheaper().to_string(),
            ])?;
        }
        if !rows.is_empty() {
            eprintln!("{}", crossover(eps, &rows));
        }
    }
    let sink = out.into_inner().map_err(|e| match &args.output {
        Some(p) => CliError::io(p, e.into_error()),
        None => CliError::stdout(e.into_error()),
    })?;
    sink.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use distimator::estimator::estimate_werner_depolarized;

    #[test]
    fn depolarized_curve_matches_the_closed_form() {
        let s = (-0.25f64).exp();
        let curve = depolarized_curve(s);
        for w in [0.0, 0.2, 0.4, 0.6] {
            let p = curve.eval(w);
            assert!((p - (s * (1.0 - w) * (1.0 - w) + 1.0) / 4.0).abs() < 1e-15);
            let r = estimate_werner_depolarized(p, s, 1000, 0.01).unwrap();
            assert!((r.w_hat.unwrap() - w).abs() < 1e-12);
        }
    }

    #[test]
    fn help_lists_the_columns_in_order() {
        use clap::{CommandFactory, Parser};
        #[derive(Parser)]
        struct Wrapper {
            #[command(flatten)]
            args: CompareArgs,
        }
        let help = Wrapper::command().render_long_help().to_string();
        assert!(help.contains(&COLUMNS.join(",")), "{help}");
    }
}

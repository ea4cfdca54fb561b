use std::path::PathBuf;

use clap::Args;
use distimator::estimator::{
    deviation_thresholds, estimate_bell, estimate_werner, required_rounds, required_rounds_bell,
    tomography_bell_samples, tomography_werner_samples,
};
use distimator::experiment::run_experiment;
use distimator::{BellVector, EstimateReport, Parameterization, Protocol};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{grid, per_channel, resolve, NoiseSpec, Range};
use crate::error::CliError;
use crate::estimate::{report_fields, REPORT_COLUMNS};
use crate::output::{num, opt, Sink};
use crate::simulate::RunArgs;

const DEFAULT_ROUNDS: u64 = 100_000;

pub const WERNER_HEAD: [&str; 5] = ["w", "eps_w", "rounds", "seed", "p_hat"];
pub const BELL_HEAD: [&str; 12] = [
    "q1", "q2", "q3", "q4", "eps1", "eps2", "eps3", "rounds", "seed", "p_hat_a", "p_hat_b",
    "p_hat_c",
];
pub const TAIL: [&str; 4] = [
    "trace_distance",
    "required_rounds",
    "required_consumed",
    "tomography_n",
];

pub fn columns(head: &[&'static str]) -> Vec<&'static str> {
    head.iter()
        .chain(REPORT_COLUMNS.iter())
        .chain(TAIL.iter())
        .copied()
        .collect()
}

fn half_l1(a: [f64; 4], b: [f64; 4]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

fn tail(
    report: &EstimateReport,
    truth: &BellVector,
    required: Option<(u64, f64)>,
    tom: u64,
) -> Vec<String> {
    vec![
        num(half_l1(report.q_hat, truth.weights())),
        opt(required.map(|r| r.0)),
        opt(required.map(|r| num(r.1))),
        tom.to_string(),
    ]
}

fn write_table(
    output: Option<&std::path::Path>,
    header: &[&str],
    rows: Vec<Vec<String>>,
) -> Result<(), CliError> {
    let sink = Sink::open(output)?;
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    let sink = w.into_inner().map_err(|e| match output {
        Some(p) => CliError::io(p, e.into_error()),
        None => CliError::stdout(e.into_error()),
    })?;
    sink.finish()
}

/// Simulate and estimate Werner states over a grid of w and ε_w.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[command(after_help = concat!(
    "CSV columns: w,eps_w,rounds,seed,p_hat,w_hat,q1_hat,q2_hat,q3_hat,q4_hat,",
    "x1_hat,x2_hat,x3_hat,delta,valid,clamped,consumed,trace_distance,",
    "required_rounds,required_consumed,tomography_n\n\n",
    "One protocol-a run per w, using seed + (index of w). required_rounds is the\n",
    "smallest N meeting --delta at the true w for that run's delays, and\n",
    "required_consumed = (2 - p) * required_rounds. tomography_n is the number of\n",
    "states a tomographic estimate needs for the same --delta and eps_w."
))]
pub struct SweepWernerArgs {
    /// JSON file with any of these options; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Werner parameters [default: 0,0.1,...,0.6]
    #[arg(long, value_delimiter = ',', conflicts_with = "w_range")]
    pub w: Option<Vec<f64>>,
    /// Werner parameters as start:stop:count
    #[arg(long)]
    pub w_range: Option<Range>,
    /// Error bounds [default: 0.01]
    #[arg(long, value_delimiter = ',')]
    pub eps_w: Option<Vec<f64>>,
    /// Failure-probability target for required_rounds and tomography_n [default: 0.01]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Rounds per run [default: 100000]
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-attempt generation probability of the stored pair [default: 1]
    #[arg(long)]
    pub p_g: Option<f64>,
    /// Divisor turning attempt counts into memory-time units [default: 100]
    #[arg(long)]
    pub delay_scale: Option<f64>,
    /// CSV file [default: stdout]
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(default)]
    pub noise: NoiseSpec,
}

pub fn run_werner(args: SweepWernerArgs) -> Result<(), CliError> {
    let config = args.config.clone();
    let args = resolve(args, config.as_deref())?;
    let model = args.noise.model()?;
    let ws = grid(&args.w, &args.w_range, &[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6]);
    let eps_list = args.eps_w.clone().unwrap_or_else(|| vec![0.01]);
    let delta = args.delta.unwrap_or(0.01);
    let run = RunArgs {
        rounds: args.rounds,
        seed: args.seed,
        p_g: args.p_g,
        delay_scale: args.delay_scale,
    };
    let toms = eps_list
        .iter()
        .map(|&e| tomography_werner_samples(delta, e))
        .collect::<Result<Vec<_>, _>>()?;
    let configs = (0..ws.len())
        .map(|i| run.config(Protocol::A, Some(DEFAULT_ROUNDS), model, i as u64))
        .collect::<Result<Vec<_>, _>>()?;
    let truths = ws
        .iter()
        .map(|&w| BellVector::werner(w))
        .collect::<Result<Vec<_>, _>>()?;

    let rows: Vec<Vec<Vec<String>>> = (0..ws.len())
        .into_par_iter()
        .map(|i| -> Result<_, CliError> {
            let (w, cfg, truth) = (ws[i], &configs[i], &truths[i]);
            let log = run_experiment(truth, cfg)?;
            let curve = log.success_curve(Parameterization::Werner)?;
            let p = curve.eval(w);
            let mut out = Vec::with_capacity(eps_list.len());
            for (&eps, &tom) in eps_list.iter().zip(&toms) {
                let report = estimate_werner(&log, eps)?;
                let (l, r) = deviation_thresholds(&curve, p, w, eps);
                let required = required_rounds(l, r, delta)
                    .ok()
                    .map(|n| (n, (2.0 - p) * n as f64));
                let mut row = vec![
                    num(w),
                    num(eps),
                    cfg.n_rounds.to_string(),
                    cfg.seed.to_string(),
                    num(log.p_hat()),
                ];
                row.extend(report_fields(&report));
                row.extend(tail(&report, truth, required, tom));
                out.push(row);
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    write_table(
        args.output.as_deref(),
        &columns(&WERNER_HEAD),
        rows.into_iter().flatten().collect(),
    )
}

/// Simulate and estimate Bell-diagonal states over a (q1, q2) grid.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[command(after_help = concat!(
    "CSV columns: q1,q2,q3,q4,eps1,eps2,eps3,rounds,seed,p_hat_a,p_hat_b,p_hat_c,",
    "w_hat,q1_hat,q2_hat,q3_hat,q4_hat,x1_hat,x2_hat,x3_hat,delta,valid,clamped,",
    "consumed,trace_distance,required_rounds,required_consumed,tomography_n\n\n",
    "Grid points are q = (q1, s(1 - q1), r, r) with s from --q2-share and\n",
    "r = (1 - q1 - q2)/2; s = 1/3 is the Werner line. Point i runs protocols a, b\n",
    "and c with seed + i. required_rounds is the smallest common per-protocol N\n",
    "meeting --delta at the true state, required_consumed = sum (2 - p_i) N, and\n",
    "tomography_n is the total count of a tomographic estimate over three bases."
))]
pub struct SweepBellArgs {
    /// JSON file with any of these options; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Values of q1 [default: 0.6,0.7,0.8,0.9,0.95]
    #[arg(long, value_delimiter = ',', conflicts_with = "q1_range")]
    pub q1: Option<Vec<f64>>,
    /// Values of q1 as start:stop:count
    #[arg(long)]
    pub q1_range: Option<Range>,
    /// Values of q2 / (1 - q1) [default: 0,0.25,0.5,0.75,1]
    #[arg(long, value_delimiter = ',', conflicts_with = "q2_share_range")]
    pub q2_share: Option<Vec<f64>>,
    /// Values of q2 / (1 - q1) as start:stop:count
    #[arg(long)]
    pub q2_share_range: Option<Range>,
    /// Error bounds on the intermediates, one or three values [default: 0.01]
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Failure-probability target for required_rounds and tomography_n [default: 0.01]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Rounds per protocol [default: 100000]
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Master seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Per-attempt generation probability of the stored pair [default: 1]
    #[arg(long)]
    pub p_g: Option<f64>,
    /// Divisor turning attempt counts into memory-time units [default: 100]
    #[arg(long)]
    pub delay_scale: Option<f64>,
    /// CSV file [default: stdout]
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(default)]
    pub noise: NoiseSpec,
}

pub fn run_bell(args: SweepBellArgs) -> Result<(), CliError> {
    let config = args.config.clone();
    let args = resolve(args, config.as_deref())?;
    let model = args.noise.model()?;
    let q1s = grid(&args.q1, &args.q1_range, &[0.6, 0.7, 0.8, 0.9, 0.95]);
    let shares = grid(
        &args.q2_share,
        &args.q2_share_range,
        &[0.0, 0.25, 0.5, 0.75, 1.0],
    );
    let eps = per_channel(args.eps.as_deref().unwrap_or(&[0.01]), "eps")?;
    let delta = args.delta.unwrap_or(0.01);
    let tom = 3 * tomography_bell_samples(delta, eps)?;
    let run = RunArgs {
        rounds: args.rounds,
        seed: args.seed,
        p_g: args.p_g,
        delay_scale: args.delay_scale,
    };
    let mut points = Vec::new();
    for &q1 in &q1s {
        for &s in &shares {
            let q2 = s * (1.0 - q1);
            let r = 0.5 * (1.0 - q1 - q2);
            points.push(BellVector::new([q1, q2, r, r])?);
        }
    }
    let configs = (0..points.len())
        .map(|i| {
            Protocol::ALL
                .into_iter()
                .map(|p| run.config(p, Some(DEFAULT_ROUNDS), model, i as u64))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let rows: Vec<Vec<String>> = (0..points.len())
        .into_par_iter()
        .map(|i| -> Result<_, CliError> {
            let truth = &points[i];
            let logs = configs[i]
                .iter()
                .map(|cfg| run_experiment(truth, cfg))
                .collect::<Result<Vec<_>, _>>()?;
            let report = estimate_bell([&logs[0], &logs[1], &logs[2]], eps)?;
            let x = truth.intermediates();
            let mut thresholds = [(0.0, 0.0); 3];
            let mut ps = [0.0; 3];
            for k in 0..3 {
                let curve = logs[k].success_curve(Parameterization::Bell)?;
                ps[k] = curve.eval(x[k]);
                thresholds[k] = deviation_thresholds(&curve, ps[k], x[k], eps[k]);
            }
            let required = required_rounds_bell(thresholds, delta)
                .ok()
                .map(|n| (n, ps.iter().map(|p| (2.0 - p) * n as f64).sum()));
            let mut row: Vec<String> = truth.weights().iter().map(|&v| num(v)).collect();
            row.extend(eps.iter().map(|&e| num(e)));
            row.push(configs[i][0].n_rounds.to_string());
            row.push(configs[i][0].seed.to_string());
            row.extend(logs.iter().map(|l| num(l.p_hat())));
            row.extend(report_fields(&report));
            row.extend(tail(&report, truth, required, tom));
            Ok(row)
        })
        .collect::<Result<_, _>>()?;
    write_table(args.output.as_deref(), &columns(&BELL_HEAD), rows)
}

//! Seeded Monte Carlo runs of a protocol and the averaged success curve
//! that the estimators invert.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use crate::bellvec::{werner_weights, BellVector, NoiseModel};
use crate::error::{check_closed, Error, Result};
use crate::protocols::{quadratic_for_memory, success_weights, Protocol, QuadraticForm};

pub const LOG_HEADER: &str = "# distimator-log v1";

/// Default divisor turning attempt counts into memory-time units.
pub const DEFAULT_DELAY_SCALE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    pub n_rounds: u64,
    /// Per-attempt generation success probability.
    pub p_g: f64,
    pub delay_scale: f64,
    pub model: NoiseModel,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(protocol: Protocol, n_rounds: u64, model: NoiseModel, seed: u64) -> Self {
        ExperimentConfig {
            protocol,
            n_rounds,
            p_g: 1.0,
            delay_scale: DEFAULT_DELAY_SCALE,
            model,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::EmptyExperiment);
        }
        if self.n_rounds >= 1 << 48 {
            return Err(Error::Domain {
                name: "n_rounds",
                value: self.n_rounds as f64,
                range: "[1, 2^48)",
            });
        }
        check_p_g(self.p_g)?;
        if !(self.delay_scale.is_finite() && self.delay_scale > 0.0) {
            return Err(Error::Domain {
                name: "delay_scale",
                value: self.delay_scale,
                range: "(0, inf)",
            });
        }
        self.model.validate()
    }
}

fn check_p_g(p_g: f64) -> Result<f64> {
    if p_g.is_finite() && p_g > 0.0 && p_g <= 1.0 {
        Ok(p_g)
    } else {
        Err(Error::Domain {
            name: "p_g",
            value: p_g,
            range: "(0, 1]",
        })
    }
}

/// Outcome counts and storage delays of one protocol's rounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentLog {
    pub protocol: Protocol,
    pub n_rounds: u64,
    pub n_success: u64,
    /// Storage time of the control copy in each round.
    pub delays: Vec<f64>,
    pub model: NoiseModel,
}

impl ExperimentLog {
    pub fn validate(&self) -> Result<()> {
        if self.n_rounds == 0 {
            return Err(Error::EmptyExperiment);
        }
        if self.n_success > self.n_rounds {
            return Err(Error::InvalidVector(format!(
                "{} successes in {} rounds",
                self.n_success, self.n_rounds
            )));
        }
        if self.delays.len() as u64 != self.n_rounds {
            return Err(Error::InvalidVector(format!(
                "{} delays for {} rounds",
                self.delays.len(),
                self.n_rounds
            )));
        }
        self.model.validate()
    }

    pub fn p_hat(&self) -> f64 {
        self.n_success as f64 / self.n_rounds as f64
    }

    /// Pairs used up: two per round, minus the kept pair of each success.
    pub fn consumed(&self) -> u64 {
        2 * self.n_rounds - self.n_success
    }

    /// Success curve averaged over this log's delays.
    pub fn success_curve(&self, parameterization: Parameterization) -> Result<SuccessCurve> {
        self.validate()?;
        Ok(SuccessCurve::from_delays(
            self.protocol,
            &self.model,
            &self.delays,
            parameterization,
        ))
    }

    /// Average `(1 - λ_A)(1 - λ_B)` of the memory depolarization over the logged delays.
    pub fn mean_survival(&self) -> Result<f64> {
        self.validate()?;
        let total: f64 = histogram(&self.delays)
            .map(|(dt, count)| {
                let m = self.model.memory_parameters(dt);
                count as f64 * (1.0 - m.lambda_a) * (1.0 - m.lambda_b)
            })
            .sum();
        Ok(total / self.n_rounds as f64)
    }

    /// Writes one `distimator-log v1` record. Numbers carry 17 significant digits.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{LOG_HEADER}")?;
        writeln!(
            out,
            "{},{},{}",
            self.protocol.tag(),
            self.n_rounds,
            self.n_success
        )?;
        for d in &self.delays {
            writeln!(out, "{d:.16e}")?;
        }
        Ok(())
    }
}

/// Reads every record from a log stream. The text format carries no noise
/// model, so the caller supplies the one the run used.
pub fn read_logs<R: BufRead>(input: R, model: &NoiseModel) -> Result<Vec<ExperimentLog>> {
    let parse = |line: usize, msg: String| Error::Parse { line, msg };
    let mut logs: Vec<ExperimentLog> = Vec::new();
    let mut pending = 0u64;
    let mut expect_counts = false;
    let mut last = 0;
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        last = lineno;
        let line = line.map_err(|e| parse(lineno, e.to_string()))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == LOG_HEADER {
            if pending > 0 || expect_counts {
                return Err(parse(lineno, "record ended early".into()));
            }
            expect_counts = true;
            continue;
        }
        if expect_counts {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [tag, n, k] = fields[..] else {
                return Err(parse(
                    lineno,
                    format!("expected protocol,n_rounds,n_success: {line:?}"),
                ));
            };
            let protocol: Protocol = tag
                .parse()
                .map_err(|e: Error| parse(lineno, e.to_string()))?;
            let n_rounds: u64 = n
                .parse()
                .map_err(|_| parse(lineno, format!("bad round count {n:?}")))?;
            let n_success: u64 = k
                .parse()
                .map_err(|_| parse(lineno, format!("bad success count {k:?}")))?;
            if n_success > n_rounds {
                return Err(parse(
                    lineno,
                    format!("{n_success} successes in {n_rounds} rounds"),
                ));
            }
            logs.push(ExperimentLog {
                protocol,
                n_rounds,
                n_success,
                delays: Vec::with_capacity(n_rounds.min(1 << 24) as usize),
                model: *model,
            });
            pending = n_rounds;
            expect_counts = false;
            continue;
        }
        let Some(log) = logs.last_mut().filter(|_| pending > 0) else {
            return Err(parse(lineno, format!("unexpected line {line:?}")));
        };
        let d: f64 = line
            .parse()
            .map_err(|_| parse(lineno, format!("bad delay {line:?}")))?;
        if !(d.is_finite() && d >= 0.0) {
            return Err(parse(
                lineno,
                format!("delay {d} must be finite and non-negative"),
            ));
        }
        log.delays.push(d);
        pending -= 1;
    }
    if pending > 0 || expect_counts {
        return Err(parse(last, "log ended inside a record".into()));
    }
    Ok(logs)
}

/// Independent generator for one round of one protocol's run.
pub fn round_rng(seed: u64, protocol: Protocol, round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((protocol.index() as u64) << 48) | round);
    rng.set_word_pos(0);
    rng
}

/// Number of generation attempts until the first success, starting at 1.
pub fn sample_attempts<R: Rng + ?Sized>(p_g: f64, rng: &mut R) -> Result<u64> {
    check_p_g(p_g)?;
    let geo = Geometric::new(p_g).expect("p_g checked");
    Ok(geo.sample(rng) + 1)
}

/// Storage delay of round `round`: attempts divided by `delay_scale`.
pub fn sample_generation_delay(
    p_g: f64,
    delay_scale: f64,
    protocol: Protocol,
    round: u64,
    seed: u64,
) -> Result<f64> {
    let mut rng = round_rng(seed, protocol, round);
    Ok(sample_attempts(p_g, &mut rng)? as f64 / delay_scale)
}

/// Simulates `cfg.n_rounds` rounds on copies of `q_true`. The result does
/// not depend on how rounds are spread over threads.
pub fn run_experiment(q_true: &BellVector, cfg: &ExperimentConfig) -> Result<ExperimentLog> {
    cfg.validate()?;
    let geo = Geometric::new(cfg.p_g).expect("p_g validated");
    let q = q_true.weights();
    let outcomes: Vec<(f64, bool)> = (0..cfg.n_rounds)
        .into_par_iter()
        .map(|round| {
            let mut rng = round_rng(cfg.seed, cfg.protocol, round);
            let dt = (geo.sample(&mut rng) + 1) as f64 / cfg.delay_scale;
            let memory = cfg.model.memory_parameters(dt);
            let p = success_weights(cfg.protocol, q, &cfg.model, &memory).clamp(0.0, 1.0);
            (dt, rng.random_bool(p))
        })
        .collect();
    let n_success = outcomes.iter().filter(|(_, ok)| *ok).count() as u64;
    Ok(ExperimentLog {
        protocol: cfg.protocol,
        n_rounds: cfg.n_rounds,
        n_success,
        delays: outcomes.into_iter().map(|(dt, _)| dt).collect(),
        model: cfg.model,
    })
}

fn histogram(delays: &[f64]) -> impl Iterator<Item = (f64, u64)> {
    let mut counts: HashMap<u64, u64> = HashMap::new();
    for d in delays {
        *counts.entry(d.to_bits()).or_default() += 1;
    }
    let mut counts: Vec<_> = counts.into_iter().collect();
    counts.sort_unstable();
    counts
        .into_iter()
        .map(|(bits, n)| (f64::from_bits(bits), n))
}

/// How a scalar candidate maps onto a Bell vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameterization {
    /// Werner parameter `w`; protocol A's intermediate is `1 - w/2`.
    Werner,
    /// The protocol's own intermediate `x`.
    Bell,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

/// Expected success probability as a function of the candidate parameter,
/// averaged over a set of storage delays.
///
/// Each round's success is quadratic in the intermediate, so the average is
/// the quadratic with averaged coefficients. [`SuccessCurve::eval`] is that
/// polynomial and is defined past the physical range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessCurve {
    pub protocol: Protocol,
    pub form: QuadraticForm,
    pub parameterization: Parameterization,
}

impl SuccessCurve {
    pub fn from_delays(
        protocol: Protocol,
        model: &NoiseModel,
        delays: &[f64],
        parameterization: Parameterization,
    ) -> Self {
        let total = delays.len() as f64;
        let (slope, constant) = histogram(delays).fold((0.0, 0.0), |(s, c), (dt, n)| {
            let form = quadratic_for_memory(protocol, model, &model.memory_parameters(dt));
            (s + n as f64 * form.slope, c + n as f64 * form.constant)
        });
        SuccessCurve {
            protocol,
            form: QuadraticForm {
                slope: slope / total,
                constant: constant / total,
            },
            parameterization,
        }
    }

    pub fn noiseless(protocol: Protocol, parameterization: Parameterization) -> Self {
        SuccessCurve {
            protocol,
            form: QuadraticForm::NOISELESS,
            parameterization,
        }
    }

    pub fn orientation(&self) -> Orientation {
        match self.parameterization {
            Parameterization::Werner => Orientation::Decreasing,
            Parameterization::Bell => Orientation::Increasing,
        }
    }

    pub fn eval(&self, candidate: f64) -> f64 {
        let x = match self.parameterization {
            Parameterization::Werner => 1.0 - 0.5 * candidate,
            Parameterization::Bell => candidate,
        };
        self.form.eval(x)
    }

    /// Candidate values the curve is physically defined on.
    pub fn domain(&self) -> (f64, f64) {
        match self.parameterization {
            Parameterization::Werner => (0.0, 1.0),
            Parameterization::Bell => (0.5, 1.0),
        }
    }
}

/// Average success probability the log's rounds would show at `candidate`.
pub fn expected_statistic(
    log: &ExperimentLog,
    parameterization: Parameterization,
    candidate: f64,
) -> Result<f64> {
    let curve = log.success_curve(parameterization)?;
    let (lo, hi) = curve.domain();
    let range = match parameterization {
        Parameterization::Werner => "[0, 1]",
        Parameterization::Bell => "[1/2, 1]",
    };
    check_closed("candidate", candidate, lo, hi, range)?;
    Ok(curve.eval(candidate))
}

/// Exact average of the per-round pipeline, without the quadratic shortcut.
#[cfg(test)]
pub(crate) fn direct_average(log: &ExperimentLog, q: [f64; 4]) -> f64 {
    let total: f64 = histogram(&log.delays)
        .map(|(dt, n)| {
            n as f64
                * success_weights(
                    log.protocol,
                    q,
                    &log.model,
                    &log.model.memory_parameters(dt),
                )
        })
        .sum();
    total / log.n_rounds as f64
}

/// Bell vector a candidate stands for under a parameterization.
pub fn candidate_weights(
    protocol: Protocol,
    parameterization: Parameterization,
    c: f64,
) -> [f64; 4] {
    match parameterization {
        Parameterization::Werner => werner_weights(c),
        Parameterization::Bell => protocol.family_weights(c),
    }
}

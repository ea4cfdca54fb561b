use std::path::PathBuf;

use clap::Args;
use distimator::experiment::run_experiment;
use distimator::{BellVector, ExperimentConfig, Protocol};
use serde::{Deserialize, Serialize};

use crate::config::{resolve, NoiseSpec};
use crate::error::CliError;
use crate::output::Sink;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolChoice {
    A,
    B,
    C,
    /// One record each for a, b and c.
    All,
}

impl ProtocolChoice {
    pub fn protocols(self) -> Vec<Protocol> {
        match self {
            ProtocolChoice::A => vec![Protocol::A],
            ProtocolChoice::B => vec![Protocol::B],
            ProtocolChoice::C => vec![Protocol::C],
            ProtocolChoice::All => Protocol::ALL.to_vec(),
        }
    }
}

/// Run parameters shared by the simulating commands.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunArgs {
    pub rounds: Option<u64>,
    pub seed: Option<u64>,
    pub p_g: Option<f64>,
    pub delay_scale: Option<f64>,
}

impl RunArgs {
    pub fn config(
        &self,
        protocol: Protocol,
        default_rounds: Option<u64>,
        model: distimator::NoiseModel,
        seed_offset: u64,
    ) -> Result<ExperimentConfig, CliError> {
        let rounds = self
            .rounds
            .or(default_rounds)
            .ok_or_else(|| CliError::Usage("--rounds is required".into()))?;
        let mut cfg = ExperimentConfig::new(
            protocol,
            rounds,
            model,
            self.seed.unwrap_or(0).wrapping_add(seed_offset),
        );
        if let Some(p_g) = self.p_g {
            cfg.p_g = p_g;
        }
        if let Some(scale) = self.delay_scale {
            cfg.delay_scale = scale;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Simulate protocol runs on copies of a Bell-diagonal state and write logs.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// JSON file with any of these options; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Werner parameter of the state
    #[arg(long, conflicts_with = "q")]
    pub werner: Option<f64>,
    /// Bell weights q1,q2,q3,q4 of the state
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<f64>>,
    /// Protocol to run [default: a]
    #[arg(long, value_enum)]
    pub protocol: Option<ProtocolChoice>,
    /// Rounds per protocol
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
    /// Log file [default: stdout]
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    #[serde(default)]
    pub noise: NoiseSpec,
}

impl SimulateArgs {
    fn run_args(&self) -> RunArgs {
        RunArgs {
            rounds: self.rounds,
            seed: self.seed,
            p_g: self.p_g,
            delay_scale: self.delay_scale,
        }
    }
}

pub fn state(werner: Option<f64>, q: &Option<Vec<f64>>) -> Result<BellVector, CliError> {
    match (werner, q) {
        (Some(w), None) => Ok(BellVector::werner(w)?),
        (None, Some(q)) => {
            let w: [f64; 4] = q
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Usage(format!("--q takes four weights, got {}", q.len())))?;
            Ok(BellVector::new(w)?)
        }
        (Some(_), Some(_)) => Err(CliError::Usage(
            "give either --werner or --q, not both".into(),
        )),
        (None, None) => Err(CliError::Usage("one of --werner or --q is required".into())),
    }
}

pub fn run(args: SimulateArgs) -> Result<(), CliError> {
    let config = args.config.clone();
    let args = resolve(args, config.as_deref())?;
    let truth = state(args.werner, &args.q)?;
    let model = args.noise.model()?;
    let protocols = args.protocol.unwrap_or(ProtocolChoice::A).protocols();
    let configs = protocols
        .into_iter()
        .map(|p| args.run_args().config(p, None, model, 0))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = Sink::open(args.output.as_deref())?;
    for cfg in &configs {
        let log = run_experiment(&truth, cfg)?;
        log.write_to(&mut out).map_err(|e| out.error(e))?;
    }
    out.finish()
}

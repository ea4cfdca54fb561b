//! Flag and JSON-file configuration shared by the subcommands.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use distimator::{NoiseModel, PartyNoise};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use crate::error::CliError;

/// A memory characteristic time; `inf` disables the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Time(pub f64);

impl FromStr for Time {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" => Ok(Time(f64::INFINITY)),
            other => other
                .parse()
                .map(Time)
                .map_err(|_| format!("expected a number or \"inf\", got {s:?}")),
        }
    }
}

impl fmt::Display for Time {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Time {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Time {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(Time(v)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Perfect devices and memories.
    Ideal,
    /// CNOT depolarizing 0.01, Z readout 0.99, unit memory times.
    WernerBenchmark,
    /// Werner benchmark plus rotation depolarizing 0.01 and X readout 0.99.
    BellBenchmark,
}

impl Preset {
    fn model(self) -> NoiseModel {
        match self {
            Preset::Ideal => NoiseModel::ideal(),
            Preset::WernerBenchmark => NoiseModel::werner_benchmark(),
            Preset::BellBenchmark => NoiseModel::bell_benchmark(),
        }
    }
}

/// Noise model: a preset, then symmetric values, then per-party overrides.
#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Starting noise model [default: ideal]
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// Static memory depolarizing probability, both parties
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Static memory dephasing probability in [0, 1/2], both parties
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Rotation depolarizing probability, both parties
    #[arg(long)]
    pub m: Option<f64>,
    /// CNOT depolarizing probability, both parties
    #[arg(long)]
    pub y: Option<f64>,
    /// Z readout fidelity in (1/2, 1], both parties
    #[arg(long)]
    pub eta_z: Option<f64>,
    /// X readout fidelity in (1/2, 1], both parties
    #[arg(long)]
    pub eta_x: Option<f64>,
    /// Memory depolarizing time, both parties ("inf" disables)
    #[arg(long)]
    pub t_dpo: Option<Time>,
    /// Memory dephasing time, both parties ("inf" disables)
    #[arg(long)]
    pub t_dph: Option<Time>,
    #[arg(long, hide_short_help = true)]
    pub lambda_a: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub lambda_b: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub zeta_a: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub zeta_b: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub m_a: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub m_b: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub y_a: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub y_b: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub eta_z_a: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub eta_z_b: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub eta_x_a: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub eta_x_b: Option<f64>,
    #[arg(long, hide_short_help = true)]
    pub t_dpo_a: Option<Time>,
    #[arg(long, hide_short_help = true)]
    pub t_dpo_b: Option<Time>,
    #[arg(long, hide_short_help = true)]
    pub t_dph_a: Option<Time>,
    #[arg(long, hide_short_help = true)]
    pub t_dph_b: Option<Time>,
}

fn set(target: &mut f64, value: Option<f64>) {
    if let Some(v) = value {
        *target = v;
    }
}

fn set_time(target: &mut f64, value: Option<Time>) {
    if let Some(Time(v)) = value {
        *target = v;
    }
}

impl NoiseSpec {
    pub fn model(&self) -> Result<NoiseModel, CliError> {
        let mut model = self.preset.unwrap_or(Preset::Ideal).model();
        for party in [&mut model.alice, &mut model.bob] {
            self.apply_symmetric(party);
        }
        set(&mut model.alice.lambda, self.lambda_a);
        set(&mut model.bob.lambda, self.lambda_b);
        set(&mut model.alice.zeta, self.zeta_a);
        set(&mut model.bob.zeta, self.zeta_b);
        set(&mut model.alice.m, self.m_a);
        set(&mut model.bob.m, self.m_b);
        set(&mut model.alice.y, self.y_a);
        set(&mut model.bob.y, self.y_b);
        set(&mut model.alice.eta_z, self.eta_z_a);
        set(&mut model.bob.eta_z, self.eta_z_b);
        set(&mut model.alice.eta_x, self.eta_x_a);
        set(&mut model.bob.eta_x, self.eta_x_b);
        for t in [&mut model.t_dpo_a, &mut model.t_dpo_b] {
            set_time(t, self.t_dpo);
        }
        for t in [&mut model.t_dph_a, &mut model.t_dph_b] {
            set_time(t, self.t_dph);
        }
        set_time(&mut model.t_dpo_a, self.t_dpo_a);
        set_time(&mut model.t_dpo_b, self.t_dpo_b);
        set_time(&mut model.t_dph_a, self.t_dph_a);
        set_time(&mut model.t_dph_b, self.t_dph_b);
        model.validate()?;
        Ok(model)
    }

    fn apply_symmetric(&self, party: &mut PartyNoise) {
        set(&mut party.lambda, self.lambda);
        set(&mut party.zeta, self.zeta);
        set(&mut party.m, self.m);
        set(&mut party.y, self.y);
        set(&mut party.eta_z, self.eta_z);
        set(&mut party.eta_x, self.eta_x);
    }
}

/// Overlays explicitly given flags on the JSON config file, if any.
pub fn resolve<S>(flags: S, config: Option<&Path>) -> Result<S, CliError>
where
    S: Serialize + DeserializeOwned,
{
    let Some(path) = config else {
        return Ok(flags);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut merged: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if !merged.is_object() {
        return Err(CliError::Usage(format!(
            "{}: expected a JSON object",
            path.display()
        )));
    }
    let flags = serde_json::to_value(&flags).map_err(|e| CliError::Usage(e.to_string()))?;
    overlay(&mut merged, flags);
    serde_json::from_value(merged).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn overlay(base: &mut Value, top: Value) {
    match (base, top) {
        (Value::Object(base), Value::Object(top)) => {
            for (key, value) in top {
                if value.is_null() {
                    continue;
                }
                match base.get_mut(&key) {
                    Some(slot) if slot.is_object() && value.is_object() => overlay(slot, value),
                    _ => {
                        base.insert(key, value);
                    }
                }
            }
        }
        (base, top) => {
            if !top.is_null() {
                *base = top;
            }
        }
    }
}

/// Evenly spaced points `start:stop:count`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("expected start:stop:count, got {s:?}"));
        };
        let num = |v: &str| v.parse::<f64>().map_err(|_| format!("bad number {v:?}"));
        Ok(Range {
            start: num(start)?,
            stop: num(stop)?,
            count: count
                .parse()
                .map_err(|_| format!("bad point count {count:?}"))?,
        })
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl Serialize for Range {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Range {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

impl Range {
    /// Evenly spaced points, rounded to 12 decimals.
    pub fn points(&self) -> Vec<f64> {
        let tidy = |v: f64| (v * 1e12).round() / 1e12;
        match self.count {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n)
                .map(|i| tidy(self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64))
                .collect(),
        }
    }
}

/// An explicit list wins over a range; with neither, the default applies.
pub fn grid(list: &Option<Vec<f64>>, range: &Option<Range>, default: &[f64]) -> Vec<f64> {
    match (list, range) {
        (Some(list), _) => list.clone(),
        (None, Some(range)) => range.points(),
        (None, None) => default.to_vec(),
    }
}

/// One value for every channel, or one per channel.
pub fn per_channel(values: &[f64], name: &str) -> Result<[f64; 3], CliError> {
    match *values {
        [v] => Ok([v; 3]),
        [a, b, c] => Ok([a, b, c]),
        _ => Err(CliError::Usage(format!(
            "--{name} takes one value or three, got {}",
            values.len()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times_accept_infinity() {
        assert_eq!("inf".parse::<Time>().unwrap().0, f64::INFINITY);
        assert_eq!("2.5".parse::<Time>().unwrap().0, 2.5);
        assert!("soon".parse::<Time>().is_err());
        let t: Time = serde_json::from_str("\"inf\"").unwrap();
        assert!(t.0.is_infinite());
        assert_eq!(serde_json::to_string(&t).unwrap(), "\"inf\"");
    }

    #[test]
    fn overrides_stack_in_order() {
        let spec = NoiseSpec {
            preset: Some(Preset::BellBenchmark),
            y: Some(0.02),
            y_b: Some(0.03),
            t_dpo: Some(Time(f64::INFINITY)),
            ..NoiseSpec::default()
        };
        let m = spec.model().unwrap();
        assert_eq!(m.alice.y, 0.02);
        assert_eq!(m.bob.y, 0.03);
        assert_eq!(m.alice.m, 0.01);
        assert!(m.t_dpo_a.is_infinite());
        assert_eq!(m.t_dph_a, 1.0);
        let bad = NoiseSpec {
            eta_z: Some(0.4),
            ..NoiseSpec::default()
        };
        assert!(bad.model().is_err());
    }

    #[test]
    fn ranges() {
        let r: Range = "0:0.6:7".parse().unwrap();
        let p = r.points();
        assert_eq!(p.len(), 7);
        assert_eq!(p[1], 0.1);
        assert_eq!(p[3], 0.3);
        assert!("0:1:0".parse::<Range>().unwrap().points().is_empty());
        assert!("0:1".parse::<Range>().is_err());
    }

    #[test]
    fn overlay_keeps_file_values_under_missing_flags() {
        let mut base = serde_json::json!({"a": 1, "n": {"x": 1, "y": 2}});
        overlay(
            &mut base,
            serde_json::json!({"a": null, "b": 3, "n": {"x": 5, "y": null}}),
        );
        assert_eq!(
            base,
            serde_json::json!({"a": 1, "b": 3, "n": {"x": 5, "y": 2}})
        );
    }
}

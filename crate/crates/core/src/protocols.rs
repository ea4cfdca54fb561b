//! The three recurrence protocols, each a composition of Bell-vector maps.
//!
//! Protocol A is the standard bilateral-CNOT recurrence step with a Z
//! readout of the target pair. Protocol B reads the control pair in X
//! instead, and protocol C conjugates both copies with local X rotations
//! before running A. Protocol `i` only sees the intermediate `x_i`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bellvec::{
    cnot_weights, memory_noise_weights, post_selected_weights, rotate_weights, Basis, BellVector,
    MemoryParameters, NoiseModel,
};
use crate::error::{check_closed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    A,
    B,
    C,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::A, Protocol::B, Protocol::C];

    /// 0, 1, 2 for A, B, C.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn tag(self) -> char {
        match self {
            Protocol::A => 'a',
            Protocol::B => 'b',
            Protocol::C => 'c',
        }
    }

    pub fn basis(self) -> Basis {
        match self {
            Protocol::B => Basis::X,
            Protocol::A | Protocol::C => Basis::Z,
        }
    }

    /// The one-parameter Bell vector whose intermediate for this protocol is `x`.
    pub fn family_weights(self, x: f64) -> [f64; 4] {
        match self {
            Protocol::A => [x, 0.0, 1.0 - x, 0.0],
            Protocol::B | Protocol::C => [x, 1.0 - x, 0.0, 0.0],
        }
    }

    pub fn family_vector(self, x: f64) -> Result<BellVector> {
        check_closed("x", x, 0.0, 1.0, "[0, 1]")?;
        BellVector::new(self.family_weights(x))
    }

    /// The intermediate `x_i` this protocol is sensitive to.
    pub fn intermediate(self, q: &BellVector) -> f64 {
        q.intermediates()[self.index()]
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "a" | "A" => Ok(Protocol::A),
            "b" | "B" => Ok(Protocol::B),
            "c" | "C" => Ok(Protocol::C),
            other => Err(Error::UnknownProtocol(other.into())),
        }
    }
}

/// Success probability without any noise: half the coincidence probability.
pub fn noiseless_success(protocol: Protocol, q: &BellVector) -> f64 {
    let x = protocol.intermediate(q);
    0.5 * (x * x + (1.0 - x) * (1.0 - x))
}

/// Unchecked pipeline. Also evaluated on the affine extension of the family
/// just outside the simplex.
pub(crate) fn success_and_kept_weights(
    protocol: Protocol,
    ctrl: [f64; 4],
    tgt: [f64; 4],
    model: &NoiseModel,
    memory: &MemoryParameters,
) -> ([f64; 4], f64) {
    let (a, b) = (&model.alice, &model.bob);
    let mut ctrl = memory_noise_weights(ctrl, memory);
    let mut tgt = tgt;
    if protocol == Protocol::C {
        ctrl = rotate_weights(ctrl, a.m, b.m);
        tgt = rotate_weights(tgt, a.m, b.m);
    }
    let f = cnot_weights(ctrl, tgt, a.y, b.y);
    let (eta_a, eta_b) = match protocol.basis() {
        Basis::Z => (a.eta_z, b.eta_z),
        Basis::X => (a.eta_x, b.eta_x),
    };
    post_selected_weights(&f, protocol.basis(), eta_a, eta_b)
}

pub(crate) fn success_weights(
    protocol: Protocol,
    q: [f64; 4],
    model: &NoiseModel,
    memory: &MemoryParameters,
) -> f64 {
    success_and_kept_weights(protocol, q, q, model, memory).1
}

fn check_inputs(model: &NoiseModel, dt: f64) -> Result<()> {
    model.validate()?;
    if dt.is_nan() || dt < 0.0 {
        return Err(Error::Domain {
            name: "dt",
            value: dt,
            range: "[0, inf]",
        });
    }
    Ok(())
}

/// Success probability of one round, with the control copy stored for `dt`.
pub fn noisy_success(
    protocol: Protocol,
    q: &BellVector,
    model: &NoiseModel,
    dt: f64,
) -> Result<f64> {
    check_inputs(model, dt)?;
    Ok(success_weights(
        protocol,
        q.weights(),
        model,
        &model.memory_parameters(dt),
    ))
}

/// Runs one protocol on two possibly different input pairs. Returns the
/// success probability and the state of the kept pair on success.
pub fn run_protocol(
    protocol: Protocol,
    ctrl: &BellVector,
    tgt: &BellVector,
    model: &NoiseModel,
    dt: f64,
) -> Result<(f64, BellVector)> {
    check_inputs(model, dt)?;
    let (kept, p) = success_and_kept_weights(
        protocol,
        ctrl.weights(),
        tgt.weights(),
        model,
        &model.memory_parameters(dt),
    );
    if p <= 0.0 {
        return Err(Error::Degenerate(format!(
            "protocol {protocol} succeeds with probability {p}"
        )));
    }
    Ok((p, BellVector::new(kept.map(|v| v / p))?))
}

/// `p(x) = slope·x² − slope·x + constant` along a protocol's family.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub slope: f64,
    pub constant: f64,
}

impl QuadraticForm {
    pub const NOISELESS: QuadraticForm = QuadraticForm {
        slope: 1.0,
        constant: 0.5,
    };

    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x * (x - 1.0) + self.constant
    }

    /// Smallest root of `eval(x) = p` on `x >= 1/2`, if any.
    pub fn invert(&self, p: f64) -> Option<f64> {
        if self.slope <= 0.0 {
            return None;
        }
        let disc = 0.25 + (p - self.constant) / self.slope;
        (disc >= 0.0).then(|| 0.5 + disc.sqrt())
    }
}

pub(crate) fn quadratic_for_memory(
    protocol: Protocol,
    model: &NoiseModel,
    memory: &MemoryParameters,
) -> QuadraticForm {
    let at_half = success_weights(protocol, protocol.family_weights(0.5), model, memory);
    let at_one = success_weights(protocol, protocol.family_weights(1.0), model, memory);
    QuadraticForm {
        slope: 4.0 * (at_one - at_half),
        constant: at_one,
    }
}

/// Coefficients of the success probability as a quadratic in the protocol's intermediate.
pub fn quadratic_coefficients(
    protocol: Protocol,
    model: &NoiseModel,
    dt: f64,
) -> Result<QuadraticForm> {
    check_inputs(model, dt)?;
    Ok(quadratic_for_memory(
        protocol,
        model,
        &model.memory_parameters(dt),
    ))
}

/// Fidelity of the kept pair after a noiseless protocol-A round.
pub fn distilled_fidelity_noiseless(q: &BellVector) -> Result<f64> {
    let w = q.weights();
    if w[0] <= 0.5 {
        return Err(Error::Regime(format!("q1 = {} must exceed 1/2", w[0])));
    }
    Ok((w[0] * w[0] + w[1] * w[1]) / (2.0 * noiseless_success(Protocol::A, q)))
}

//! Bell-vector algebra.
//!
//! A Bell-diagonal two-qubit state is stored as its four weights on
//! (|Φ⁺⟩, |Φ⁻⟩, |Ψ⁺⟩, |Ψ⁻⟩). Every channel used by the distillation
//! protocols maps Bell-diagonal states to Bell-diagonal states, so the whole
//! noisy pipeline reduces to small linear (and, for the two-pair CNOT,
//! bilinear) maps on 4- and 16-entry probability vectors.
//!
//! The `*_weights` functions are the unchecked polynomial maps. The estimator
//! relies on them being defined slightly outside the probability simplex
//! (evaluating a success curve at `x̂ ± ε` past the bracket), so they never
//! validate. The public wrappers check preconditions and return validated
//! vectors.

use serde::{Deserialize, Serialize};

use crate::error::{check_closed, check_probability, Error, Result};

/// Absolute tolerance on normalization and on negative rounding residue.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    Alice,
    Bob,
}

/// Weights of a Bell-diagonal state on (Φ⁺, Φ⁻, Ψ⁺, Ψ⁻).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellVector([f64; 4]);

impl BellVector {
    pub const PHI_PLUS: BellVector = BellVector([1.0, 0.0, 0.0, 0.0]);
    pub const MAXIMALLY_MIXED: BellVector = BellVector([0.25; 4]);

    /// Validates a weight vector. Negative rounding residue down to
    /// `-NORMALIZATION_TOLERANCE` is clamped and the vector renormalized.
    pub fn new(weights: [f64; 4]) -> Result<Self> {
        sanitize(weights).map(BellVector)
    }

    /// The Werner state `(1 - w)|Φ⁺⟩⟨Φ⁺| + w I/4`.
    pub fn werner(w: f64) -> Result<Self> {
        check_closed("w", w, 0.0, 1.0, "[0, 1]")?;
        Ok(BellVector(werner_weights(w)))
    }

    pub fn weights(&self) -> [f64; 4] {
        self.0
    }

    /// Fidelity with |Φ⁺⟩.
    pub fn fidelity(&self) -> f64 {
        self.0[0]
    }

    /// `x_i = q₁ + q_{i+1}` for i = 1, 2, 3: the single combination each
    /// protocol's statistics depend on.
    pub fn intermediates(&self) -> [f64; 3] {
        let q = self.0;
        [q[0] + q[1], q[0] + q[2], q[0] + q[3]]
    }

    pub fn trace_distance(&self, other: &BellVector) -> f64 {
        trace_distance_weights(&self.0, &other.0)
    }
}

impl<'de> Deserialize<'de> for BellVector {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let w = <[f64; 4]>::deserialize(de)?;
        BellVector::new(w).map_err(serde::de::Error::custom)
    }
}

impl TryFrom<[f64; 4]> for BellVector {
    type Error = Error;

    fn try_from(w: [f64; 4]) -> Result<Self> {
        BellVector::new(w)
    }
}

/// Joint Bell weights of a control ⊗ target pair of pairs. Entry
/// `4 * k + j` (0-based) holds control Bell index `k`, target Bell index `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointBellVector([f64; 16]);

impl JointBellVector {
    pub fn new(weights: [f64; 16]) -> Result<Self> {
        sanitize(weights).map(JointBellVector)
    }

    pub fn uniform() -> Self {
        JointBellVector([1.0 / 16.0; 16])
    }

    pub fn product(ctrl: &BellVector, tgt: &BellVector) -> Self {
        let mut out = [0.0; 16];
        for k in 0..4 {
            for j in 0..4 {
                out[4 * k + j] = ctrl.0[k] * tgt.0[j];
            }
        }
        JointBellVector(out)
    }

    pub fn weights(&self) -> [f64; 16] {
        self.0
    }

    pub fn get(&self, ctrl: usize, tgt: usize) -> f64 {
        self.0[4 * ctrl + tgt]
    }
}

/// Noise parameters of one party's devices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartyNoise {
    /// Static memory depolarizing probability, composed with the time-dependent decay.
    pub lambda: f64,
    /// Static memory dephasing probability, in [0, 1/2].
    pub zeta: f64,
    /// Depolarizing probability of the ±π/2 X rotation.
    pub m: f64,
    /// Depolarizing probability of the CNOT.
    pub y: f64,
    /// Probability that a Z measurement reports the true outcome, in (1/2, 1].
    pub eta_z: f64,
    /// Probability that an X measurement reports the true outcome, in (1/2, 1].
    pub eta_x: f64,
}

impl PartyNoise {
    pub const IDEAL: PartyNoise = PartyNoise {
        lambda: 0.0,
        zeta: 0.0,
        m: 0.0,
        y: 0.0,
        eta_z: 1.0,
        eta_x: 1.0,
    };

    pub fn validate(&self) -> Result<()> {
        check_probability("lambda", self.lambda)?;
        check_closed("zeta", self.zeta, 0.0, 0.5, "[0, 1/2]")?;
        check_probability("m", self.m)?;
        check_probability("y", self.y)?;
        check_eta("eta_z", self.eta_z)?;
        check_eta("eta_x", self.eta_x)?;
        Ok(())
    }
}

impl Default for PartyNoise {
    fn default() -> Self {
        PartyNoise::IDEAL
    }
}

fn check_eta(name: &'static str, eta: f64) -> Result<f64> {
    if eta.is_finite() && eta > 0.5 && eta <= 1.0 {
        Ok(eta)
    } else {
        Err(Error::Domain {
            name,
            value: eta,
            range: "(1/2, 1]",
        })
    }
}

/// Device noise of both parties plus memory characteristic times.
///
/// Times are in the unit of the logged delays. An infinite time disables
/// that decay channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub alice: PartyNoise,
    pub bob: PartyNoise,
    pub t_dpo_a: f64,
    pub t_dpo_b: f64,
    pub t_dph_a: f64,
    pub t_dph_b: f64,
}

/// Effective memory channel parameters for one storage interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryParameters {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub zeta_a: f64,
    pub zeta_b: f64,
}

impl NoiseModel {
    /// Perfect devices and no memory decoherence.
    pub fn ideal() -> Self {
        NoiseModel {
            alice: PartyNoise::IDEAL,
            bob: PartyNoise::IDEAL,
            t_dpo_a: f64::INFINITY,
            t_dpo_b: f64::INFINITY,
            t_dph_a: f64::INFINITY,
            t_dph_b: f64::INFINITY,
        }
    }

    /// Same devices on both sides, with one characteristic time for all
    /// four memory channels.
    pub fn symmetric(party: PartyNoise, memory_time: f64) -> Self {
        NoiseModel {
            alice: party,
            bob: party,
            t_dpo_a: memory_time,
            t_dpo_b: memory_time,
            t_dph_a: memory_time,
            t_dph_b: memory_time,
        }
    }

    /// Werner-estimation setting: CNOT depolarizing 0.01, Z readout fidelity
    /// 0.99, unit memory times (delays are already scaled).
    pub fn werner_benchmark() -> Self {
        NoiseModel::symmetric(
            PartyNoise {
                y: 0.01,
                eta_z: 0.99,
                ..PartyNoise::IDEAL
            },
            1.0,
        )
    }

    /// Bell-diagonal setting: the Werner benchmark plus rotation
    /// depolarizing 0.01 and X readout fidelity 0.99.
    pub fn bell_benchmark() -> Self {
        NoiseModel::symmetric(
            PartyNoise {
                m: 0.01,
                y: 0.01,
                eta_z: 0.99,
                eta_x: 0.99,
                ..PartyNoise::IDEAL
            },
            1.0,
        )
    }

    pub fn party(&self, party: Party) -> &PartyNoise {
        match party {
            Party::Alice => &self.alice,
            Party::Bob => &self.bob,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alice.validate()?;
        self.bob.validate()?;
        for (name, t) in [
            ("t_dpo_a", self.t_dpo_a),
            ("t_dpo_b", self.t_dpo_b),
            ("t_dph_a", self.t_dph_a),
            ("t_dph_b", self.t_dph_b),
        ] {
            if t.is_nan() || t <= 0.0 {
                return Err(Error::Domain {
                    name,
                    value: t,
                    range: "(0, inf]",
                });
            }
        }
        Ok(())
    }

    /// Memory channel parameters after storing a pair for `dt`.
    ///
    /// `λ(dt) = 1 - exp(-dt/T_dpo)` and `ζ(dt) = (1 - exp(-dt/T_dph))/2`,
    /// composed with the static `lambda`/`zeta` of each party.
    pub fn memory_parameters(&self, dt: f64) -> MemoryParameters {
        let depol = |stat: f64, t: f64| 1.0 - (1.0 - stat) * (-dt / t).exp();
        let dephase = |stat: f64, t: f64| 0.5 * (1.0 - (1.0 - 2.0 * stat) * (-dt / t).exp());
        MemoryParameters {
            lambda_a: depol(self.alice.lambda, self.t_dpo_a),
            lambda_b: depol(self.bob.lambda, self.t_dpo_b),
            zeta_a: dephase(self.alice.zeta, self.t_dph_a),
            zeta_b: dephase(self.bob.zeta, self.t_dph_b),
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::ideal()
    }
}

fn sanitize<const N: usize>(mut w: [f64; N]) -> Result<[f64; N]> {
    if let Some(v) = w.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidVector(format!("non-finite entry {v}")));
    }
    if let Some(v) = w.iter().find(|&&v| v < -NORMALIZATION_TOLERANCE) {
        return Err(Error::InvalidVector(format!("negative entry {v}")));
    }
    for v in w.iter_mut() {
        *v = v.max(0.0);
    }
    let sum: f64 = w.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidVector(format!("entries sum to {sum}")));
    }
    for v in w.iter_mut() {
        *v /= sum;
    }
    Ok(w)
}

pub(crate) fn werner_weights(w: f64) -> [f64; 4] {
    [1.0 - 0.75 * w, 0.25 * w, 0.25 * w, 0.25 * w]
}

pub(crate) fn trace_distance_weights(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

pub(crate) fn depolarize_weights(q: [f64; 4], lambda: f64) -> [f64; 4] {
    q.map(|v| 0.25 * lambda + (1.0 - lambda) * v)
}

pub(crate) fn dephase_weights(q: [f64; 4], zeta: f64) -> [f64; 4] {
    let keep = 1.0 - zeta;
    [
        keep * q[0] + zeta * q[1],
        keep * q[1] + zeta * q[0],
        keep * q[2] + zeta * q[3],
        keep * q[3] + zeta * q[2],
    ]
}

/// Bob's qubit first, then Alice's: depolarize then dephase on each side.
pub(crate) fn memory_noise_weights(q: [f64; 4], p: &MemoryParameters) -> [f64; 4] {
    let q = depolarize_weights(q, p.lambda_b);
    let q = dephase_weights(q, p.zeta_b);
    let q = depolarize_weights(q, p.lambda_a);
    dephase_weights(q, p.zeta_a)
}

pub(crate) fn rotate_weights(q: [f64; 4], m_a: f64, m_b: f64) -> [f64; 4] {
    let keep = (1.0 - m_a) * (1.0 - m_b);
    let mix = 0.25 * (m_a + m_b - m_a * m_b);
    [
        keep * q[0] + mix,
        keep * q[3] + mix,
        keep * q[2] + mix,
        keep * q[1] + mix,
    ]
}

/// Source (control, target) Bell indices feeding each output entry of the
/// ideal bilateral CNOT. Bit flips propagate control → target, phase flips
/// target → control.
const CNOT_SOURCES: [(usize, usize); 16] = [
    (0, 0),
    (1, 1),
    (0, 2),
    (1, 3),
    (1, 0),
    (0, 1),
    (1, 2),
    (0, 3),
    (2, 2),
    (3, 3),
    (2, 0),
    (3, 1),
    (3, 2),
    (2, 3),
    (3, 0),
    (2, 1),
];

pub(crate) fn cnot_weights(ctrl: [f64; 4], tgt: [f64; 4], y_a: f64, y_b: f64) -> [f64; 16] {
    let keep = (1.0 - y_a) * (1.0 - y_b);
    let mix = (y_a + y_b - y_a * y_b) / 16.0;
    CNOT_SOURCES.map(|(k, j)| keep * ctrl[k] * tgt[j] + mix)
}

/// Probability of reading "up, up" given a correlated pair (first) or an
/// anti-correlated pair (second) in the measured basis.
pub(crate) fn up_coefficients(eta_a: f64, eta_b: f64) -> (f64, f64) {
    let matched = 0.5 * (1.0 - eta_b - eta_a * (1.0 - 2.0 * eta_b));
    let mismatched = 0.5 * (eta_b + eta_a * (1.0 - 2.0 * eta_b));
    (matched, mismatched)
}

/// Whether the measured pair is correlated in the measurement basis:
/// Φ± for Z (target index 0, 1), Φ⁺/Ψ⁺ for X (control index 0, 2).
fn z_correlated(tgt: usize) -> bool {
    tgt < 2
}

fn x_correlated(ctrl: usize) -> bool {
    ctrl.is_multiple_of(2)
}

pub(crate) fn z_up_weights(f: &[f64; 16], eta_a: f64, eta_b: f64) -> f64 {
    let (matched, mismatched) = up_coefficients(eta_a, eta_b);
    (0..16)
        .map(|i| {
            f[i] * if z_correlated(i % 4) {
                matched
            } else {
                mismatched
            }
        })
        .sum()
}

pub(crate) fn x_up_weights(f: &[f64; 16], eta_a: f64, eta_b: f64) -> f64 {
    let (matched, mismatched) = up_coefficients(eta_a, eta_b);
    (0..16)
        .map(|i| {
            f[i] * if x_correlated(i / 4) {
                matched
            } else {
                mismatched
            }
        })
        .sum()
}

/// Measurement basis of the coincidence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    /// Z on the target pair; the control pair is kept.
    Z,
    /// X on the control pair; the target pair is kept.
    X,
}

/// Unnormalized kept-pair weights and the both-up probability.
pub(crate) fn post_selected_weights(
    f: &[f64; 16],
    basis: Basis,
    eta_a: f64,
    eta_b: f64,
) -> ([f64; 4], f64) {
    let (matched, mismatched) = up_coefficients(eta_a, eta_b);
    let mut kept = [0.0; 4];
    for (i, &v) in f.iter().enumerate() {
        let (k, j) = (i / 4, i % 4);
        match basis {
            Basis::Z => kept[k] += v * if z_correlated(j) { matched } else { mismatched },
            Basis::X => kept[j] += v * if x_correlated(k) { matched } else { mismatched },
        }
    }
    let p = kept.iter().sum();
    (kept, p)
}

pub fn depolarize(q: &BellVector, _side: Party, lambda: f64) -> Result<BellVector> {
    check_probability("lambda", lambda)?;
    BellVector::new(depolarize_weights(q.0, lambda))
}

/// Z-dephasing on one qubit. Either side maps Φ⁺ ↔ Φ⁻ and Ψ⁺ ↔ Ψ⁻.
pub fn dephase(q: &BellVector, _side: Party, zeta: f64) -> Result<BellVector> {
    check_closed("zeta", zeta, 0.0, 0.5, "[0, 1/2]")?;
    BellVector::new(dephase_weights(q.0, zeta))
}

/// Memory decoherence of a stored pair after `dt`.
pub fn apply_memory_noise(q: &BellVector, model: &NoiseModel, dt: f64) -> Result<BellVector> {
    model.validate()?;
    check_closed("dt", dt, 0.0, f64::INFINITY, "[0, inf]")?;
    BellVector::new(memory_noise_weights(q.0, &model.memory_parameters(dt)))
}

/// Noisy `R_X(-π/2) ⊗ R_X(+π/2)`: swaps the Φ⁻ and Ψ⁻ weights.
pub fn rotate_bilateral_rx(q: &BellVector, m_a: f64, m_b: f64) -> Result<BellVector> {
    check_probability("m_a", m_a)?;
    check_probability("m_b", m_b)?;
    BellVector::new(rotate_weights(q.0, m_a, m_b))
}

/// Noisy bilateral CNOT with `ctrl` as the control pair.
pub fn bilateral_cnot(
    ctrl: &BellVector,
    tgt: &BellVector,
    y_a: f64,
    y_b: f64,
) -> Result<JointBellVector> {
    check_probability("y_a", y_a)?;
    check_probability("y_b", y_b)?;
    JointBellVector::new(cnot_weights(ctrl.0, tgt.0, y_a, y_b))
}

/// Probability that both parties read "up" when measuring the target pair in Z.
pub fn z_coincidence_up_prob(f: &JointBellVector, eta_a: f64, eta_b: f64) -> Result<f64> {
    check_eta("eta_a", eta_a)?;
    check_eta("eta_b", eta_b)?;
    Ok(z_up_weights(&f.0, eta_a, eta_b))
}

/// Probability that both parties read "+" when measuring the control pair in X.
pub fn x_coincidence_up_prob(f: &JointBellVector, eta_a: f64, eta_b: f64) -> Result<f64> {
    check_eta("eta_a", eta_a)?;
    check_eta("eta_b", eta_b)?;
    Ok(x_up_weights(&f.0, eta_a, eta_b))
}

/// State of the unmeasured pair conditioned on the both-up outcome, together
/// with the probability of that outcome.
pub fn conditional_state(
    f: &JointBellVector,
    basis: Basis,
    eta_a: f64,
    eta_b: f64,
) -> Result<(BellVector, f64)> {
    check_eta("eta_a", eta_a)?;
    check_eta("eta_b", eta_b)?;
    let (kept, p) = post_selected_weights(&f.0, basis, eta_a, eta_b);
    if p <= 0.0 {
        return Err(Error::Degenerate(format!(
            "both-up outcome has probability {p}"
        )));
    }
    Ok((BellVector::new(kept.map(|v| v / p))?, p))
}

pub fn trace_distance(a: &BellVector, b: &BellVector) -> f64 {
    a.trace_distance(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn bv(w: [f64; 4]) -> BellVector {
        BellVector::new(w).unwrap()
    }

    fn assert_weights(actual: [f64; 4], expected: [f64; 4]) {
        for (a, e) in actual.iter().zip(expected) {
            assert_abs_diff_eq!(*a, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn werner_vectors() {
        assert_weights(
            BellVector::werner(0.0).unwrap().weights(),
            [1.0, 0.0, 0.0, 0.0],
        );
        assert_weights(BellVector::werner(1.0).unwrap().weights(), [0.25; 4]);
        assert_weights(
            BellVector::werner(0.4).unwrap().weights(),
            [0.7, 0.1, 0.1, 0.1],
        );
        assert!(matches!(BellVector::werner(1.2), Err(Error::Domain { .. })));
        assert!(BellVector::werner(-0.1).is_err());
    }

    #[test]
    fn validation_clamps_residue_and_rejects_violations() {
        let q = BellVector::new([1.0 + 5e-13, -5e-13, 0.0, 0.0]).unwrap();
        assert!(q.weights().iter().all(|&v| v >= 0.0));
        assert!(BellVector::new([1.1, -0.1, 0.0, 0.0]).is_err());
        assert!(BellVector::new([0.5, 0.5, 0.1, 0.0]).is_err());
        assert!(BellVector::new([f64::NAN, 0.0, 0.0, 1.0]).is_err());
    }

    #[test]
    fn depolarize_examples() {
        let phi = BellVector::PHI_PLUS;
        assert_weights(
            depolarize(&phi, Party::Bob, 1.0).unwrap().weights(),
            [0.25; 4],
        );
        let q = bv([0.4, 0.3, 0.2, 0.1]);
        assert_weights(
            depolarize(&q, Party::Alice, 0.0).unwrap().weights(),
            q.weights(),
        );
        assert_weights(
            depolarize(&phi, Party::Bob, 0.5).unwrap().weights(),
            [0.625, 0.125, 0.125, 0.125],
        );
        assert!(depolarize(&phi, Party::Bob, 1.5).is_err());
    }

    #[test]
    fn dephase_examples() {
        let q = bv([0.7, 0.1, 0.1, 0.1]);
        assert_weights(
            dephase(&q, Party::Alice, 0.5).unwrap().weights(),
            [0.4, 0.4, 0.1, 0.1],
        );
        assert_weights(dephase(&q, Party::Bob, 0.0).unwrap().weights(), q.weights());
        let q = bv([0.8, 0.0, 0.2, 0.0]);
        assert_weights(
            dephase(&q, Party::Bob, 0.1).unwrap().weights(),
            [0.72, 0.08, 0.18, 0.02],
        );
        assert!(dephase(&q, Party::Bob, 0.6).is_err());
    }

    #[test]
    fn memory_noise_examples() {
        let q = bv([0.6, 0.1, 0.2, 0.1]);
        let model = NoiseModel::symmetric(PartyNoise::IDEAL, 1.0);
        assert_weights(
            apply_memory_noise(&q, &model, 0.0).unwrap().weights(),
            q.weights(),
        );

        // Complete dephasing, no depolarization.
        let dephasing_only = NoiseModel {
            t_dpo_a: f64::INFINITY,
            t_dpo_b: f64::INFINITY,
            ..model
        };
        let out = apply_memory_noise(&q, &dephasing_only, 1e6).unwrap();
        assert_weights(out.weights(), [0.35, 0.35, 0.15, 0.15]);

        let bob_only = NoiseModel {
            t_dpo_b: 1.0,
            ..NoiseModel::ideal()
        };
        let out = apply_memory_noise(&BellVector::PHI_PLUS, &bob_only, 2f64.ln()).unwrap();
        assert_weights(out.weights(), [0.625, 0.125, 0.125, 0.125]);

        assert!(apply_memory_noise(&q, &model, -1.0).is_err());
    }

    #[test]
    fn static_and_timed_memory_noise_compose() {
        let model = NoiseModel {
            alice: PartyNoise {
                lambda: 0.2,
                zeta: 0.1,
                ..PartyNoise::IDEAL
            },
            ..NoiseModel::symmetric(PartyNoise::IDEAL, 2.0)
        };
        let p = model.memory_parameters(1.0);
        assert_abs_diff_eq!(1.0 - p.lambda_a, 0.8 * (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(1.0 - 2.0 * p.zeta_a, 0.8 * (-0.5f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.lambda_b, 1.0 - (-0.5f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn rotation_examples() {
        let q = bv([0.7, 0.1, 0.15, 0.05]);
        let r = rotate_bilateral_rx(&q, 0.0, 0.0).unwrap();
        assert_weights(r.weights(), [0.7, 0.05, 0.15, 0.1]);
        assert_weights(
            rotate_bilateral_rx(&r, 0.0, 0.0).unwrap().weights(),
            q.weights(),
        );
        assert_weights(
            rotate_bilateral_rx(&q, 1.0, 1.0).unwrap().weights(),
            [0.25; 4],
        );
    }

    #[test]
    fn cnot_examples() {
        let phi = BellVector::PHI_PLUS;
        let f = bilateral_cnot(&phi, &phi, 0.0, 0.0).unwrap();
        assert_eq!(f.weights()[0], 1.0);

        let phi_minus = bv([0.0, 1.0, 0.0, 0.0]);
        let f = bilateral_cnot(&phi, &phi_minus, 0.0, 0.0).unwrap();
        // Entry 6 (1-based) is Φ⁻ ⊗ Φ⁻: the target's phase flip reaches the control.
        assert_eq!(f.get(1, 1), 1.0);

        let q = bv([0.4, 0.3, 0.2, 0.1]);
        let f = bilateral_cnot(&q, &phi_minus, 1.0, 1.0).unwrap();
        assert!(f.weights().iter().all(|&v| (v - 1.0 / 16.0).abs() < 1e-15));
    }

    #[test]
    fn coincidence_examples() {
        let phi = BellVector::PHI_PLUS;
        let f = bilateral_cnot(&phi, &phi, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(z_coincidence_up_prob(&f, 1.0, 1.0).unwrap(), 0.5);
        assert_abs_diff_eq!(x_coincidence_up_prob(&f, 1.0, 1.0).unwrap(), 0.5);

        let u = JointBellVector::uniform();
        assert_abs_diff_eq!(
            z_coincidence_up_prob(&u, 0.8, 0.6).unwrap(),
            0.25,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            x_coincidence_up_prob(&u, 0.7, 0.9).unwrap(),
            0.25,
            epsilon = 1e-15
        );

        // Same-state pipeline: q with x1 = 0.8 gives x1² - x1 + 1/2.
        let q = bv([0.7, 0.1, 0.15, 0.05]);
        let f = bilateral_cnot(&q, &q, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(
            z_coincidence_up_prob(&f, 1.0, 1.0).unwrap(),
            0.34,
            epsilon = 1e-12
        );
        // x2 = q1 + q3 = 0.9.
        let q = bv([0.8, 0.05, 0.1, 0.05]);
        let f = bilateral_cnot(&q, &q, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(
            x_coincidence_up_prob(&f, 1.0, 1.0).unwrap(),
            0.41,
            epsilon = 1e-12
        );

        assert!(z_coincidence_up_prob(&f, 0.5, 1.0).is_err());
        assert!(x_coincidence_up_prob(&f, 1.0, 0.3).is_err());
    }

    #[test]
    fn same_state_coincidence_matches_quadratic_on_grid() {
        for i in 0..=50 {
            let x = 0.5 + 0.01 * i as f64;
            // Split the remaining weights arbitrarily; only x matters.
            let q = bv([x * 0.9, x * 0.1, (1.0 - x) * 0.3, (1.0 - x) * 0.7]);
            let f = bilateral_cnot(&q, &q, 0.0, 0.0).unwrap();
            let p = z_coincidence_up_prob(&f, 1.0, 1.0).unwrap();
            assert_abs_diff_eq!(p, x * x - x + 0.5, epsilon = 1e-12);

            let q = bv([x * 0.9, (1.0 - x) * 0.3, x * 0.1, (1.0 - x) * 0.7]);
            let f = bilateral_cnot(&q, &q, 0.0, 0.0).unwrap();
            let p = x_coincidence_up_prob(&f, 1.0, 1.0).unwrap();
            assert_abs_diff_eq!(p, x * x - x + 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn conditional_state_examples() {
        let phi = BellVector::PHI_PLUS;
        let f = bilateral_cnot(&phi, &phi, 0.0, 0.0).unwrap();
        let (kept, p) = conditional_state(&f, Basis::Z, 1.0, 1.0).unwrap();
        assert_eq!(kept, phi);
        assert_abs_diff_eq!(p, 0.5);

        let w = BellVector::werner(0.4).unwrap();
        let f = bilateral_cnot(&w, &w, 0.0, 0.0).unwrap();
        let (kept, p) = conditional_state(&f, Basis::Z, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(p, 0.34, epsilon = 1e-12);
        assert_abs_diff_eq!(kept.fidelity(), 0.5 / 0.68, epsilon = 1e-12);
        assert!(kept.fidelity() > 0.7);

        let (kept, p) = conditional_state(&JointBellVector::uniform(), Basis::X, 1.0, 1.0).unwrap();
        assert_weights(kept.weights(), [0.25; 4]);
        assert_abs_diff_eq!(p, 0.25);
    }

    #[test]
    fn conditional_state_rejects_impossible_outcome() {
        // Ψ⁺ target with perfect readout never yields up-up.
        let psi = bv([0.0, 0.0, 1.0, 0.0]);
        let f = bilateral_cnot(&BellVector::PHI_PLUS, &psi, 0.0, 0.0).unwrap();
        assert!(matches!(
            conditional_state(&f, Basis::Z, 1.0, 1.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn trace_distance_examples() {
        let q = bv([0.85, 0.05, 0.05, 0.05]);
        assert_eq!(trace_distance(&q, &q), 0.0);
        assert_abs_diff_eq!(
            trace_distance(&BellVector::PHI_PLUS, &bv([0.0, 1.0, 0.0, 0.0])),
            1.0
        );
        assert_abs_diff_eq!(
            trace_distance(&q, &BellVector::werner(0.4).unwrap()),
            0.15,
            epsilon = 1e-12
        );
    }

    fn simplex4() -> impl Strategy<Value = BellVector> {
        prop::array::uniform4(0.0f64..1.0).prop_filter_map("zero vector", |raw| {
            let s: f64 = raw.iter().sum();
            (s > 1e-6).then(|| BellVector::new(raw.map(|v| v / s)).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn channels_preserve_the_simplex(
            q in simplex4(),
            t in simplex4(),
            l in 0.0f64..=1.0,
            z in 0.0f64..=0.5,
            m in 0.0f64..=1.0,
            y in 0.0f64..=1.0,
        ) {
            prop_assert!(depolarize(&q, Party::Alice, l).is_ok());
            prop_assert!(dephase(&q, Party::Bob, z).is_ok());
            prop_assert!(rotate_bilateral_rx(&q, m, l).is_ok());
            prop_assert!(bilateral_cnot(&q, &t, y, m).is_ok());
        }

        #[test]
        fn depolarize_and_dephase_commute(q in simplex4(), l in 0.0f64..=1.0, z in 0.0f64..=0.5) {
            let a = dephase_weights(depolarize_weights(q.weights(), l), z);
            let b = depolarize_weights(dephase_weights(q.weights(), z), l);
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}

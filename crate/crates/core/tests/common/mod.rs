#![allow(dead_code)]

use distimator::{BellVector, NoiseModel, PartyNoise};
use rand::Rng;

pub fn random_bell<R: Rng>(rng: &mut R) -> BellVector {
    let raw: [f64; 4] = std::array::from_fn(|_| rng.random::<f64>());
    let s: f64 = raw.iter().sum();
    BellVector::new(raw.map(|v| v / s)).unwrap()
}

/// Bell vector with `q₁ > 1/2`, drawn through its intermediates.
pub fn random_distillable<R: Rng>(rng: &mut R) -> BellVector {
    loop {
        let q1 = rng.random_range(0.5..1.0);
        let rest: [f64; 3] = std::array::from_fn(|_| rng.random::<f64>());
        let s: f64 = rest.iter().sum();
        let w = [
            q1,
            (1.0 - q1) * rest[0] / s,
            (1.0 - q1) * rest[1] / s,
            (1.0 - q1) * rest[2] / s,
        ];
        if let Ok(q) = BellVector::new(w) {
            if q.weights()[0] > 0.5 {
                return q;
            }
        }
    }
}

/// Party noise with every parameter at most `scale` of the way from ideal
/// to its degenerate end (`λ, m, y → 1`, `ζ → 1/2`, `η → 1/2`).
pub fn random_party<R: Rng>(rng: &mut R, scale: f64) -> PartyNoise {
    PartyNoise {
        lambda: rng.random_range(0.0..scale),
        zeta: rng.random_range(0.0..0.5 * scale),
        m: rng.random_range(0.0..scale),
        y: rng.random_range(0.0..scale),
        eta_z: rng.random_range(1.0 - 0.5 * scale..=1.0),
        eta_x: rng.random_range(1.0 - 0.5 * scale..=1.0),
    }
}

pub fn random_model<R: Rng>(rng: &mut R, scale: f64) -> NoiseModel {
    NoiseModel {
        alice: random_party(rng, scale),
        bob: random_party(rng, scale),
        t_dpo_a: rng.random_range(0.5..5.0),
        t_dpo_b: rng.random_range(0.5..5.0),
        t_dph_a: rng.random_range(0.5..5.0),
        t_dph_b: rng.random_range(0.5..5.0),
    }
}

/// Geometric-looking delays: attempt counts scaled by 1/100.
pub fn random_delays<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.random_range(1..40u32) as f64 / 100.0)
        .collect()
}

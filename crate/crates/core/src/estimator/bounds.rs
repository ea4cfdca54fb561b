//! Concentration bounds, sample-size calculators and the tomography baseline.

use serde::Serialize;

use crate::bellvec::BellVector;
use crate::error::{check_closed, check_probability, Error, Result};

/// `exp(-2 n t² / (hi - lo)²)`.
pub fn hoeffding_tail(n: u64, t: f64, lo: f64, hi: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyExperiment);
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain {
            name: "t",
            value: t,
            range: "[0, inf)",
        });
    }
    if hi <= lo || !(hi - lo).is_finite() {
        return Err(Error::Domain {
            name: "hi - lo",
            value: hi - lo,
            range: "(0, inf)",
        });
    }
    let width = hi - lo;
    Ok((-2.0 * n as f64 * t * t / (width * width)).exp())
}

/// One-sided Hoeffding term for a deviation threshold on a Bernoulli mean.
/// A non-positive threshold carries no information.
pub(crate) fn one_sided(n: u64, threshold: f64) -> f64 {
    if threshold <= 0.0 {
        1.0
    } else {
        (-2.0 * n as f64 * threshold * threshold).exp()
    }
}

/// `1 - Π (1 - δ_i)` without cancellation when every `δ_i` is tiny.
pub(crate) fn union_complement<I: IntoIterator<Item = f64>>(deltas: I) -> f64 {
    let log_keep: f64 = deltas
        .into_iter()
        .map(|d| (-d.clamp(0.0, 1.0)).ln_1p())
        .sum();
    (-log_keep.exp_m1()).clamp(0.0, 1.0)
}

/// Unchecked inverse of `x_i = q₁ + q_{i+1}` under `Σq = 1`.
pub(crate) fn x_to_q_weights(x: [f64; 3]) -> [f64; 4] {
    let [x1, x2, x3] = x;
    [
        0.5 * (-1.0 + x1 + x2 + x3),
        0.5 * (1.0 + x1 - x2 - x3),
        0.5 * (1.0 - x1 + x2 - x3),
        0.5 * (1.0 - x1 - x2 + x3),
    ]
}

/// Bell vector with the given intermediates. Fails when the triple does not
/// correspond to a state.
pub fn x_to_q(x: [f64; 3]) -> Result<BellVector> {
    for v in x {
        check_closed("x", v, 0.5, 1.0, "[1/2, 1]")?;
    }
    BellVector::new(x_to_q_weights(x))
}

/// Trace-distance threshold for a state with arbitrary coherences whose
/// Bell-diagonal part is `q`.
pub fn arbitrary_state_bound(q: &BellVector, eps_t: f64) -> f64 {
    eps_t
        + q.weights()
            .iter()
            .map(|&v| (v * v * (1.0 - v * v)).sqrt())
            .sum::<f64>()
}

fn check_delta(delta: f64) -> Result<f64> {
    if delta.is_finite() && delta > 0.0 && delta < 1.0 {
        Ok(delta)
    } else {
        Err(Error::Domain {
            name: "delta",
            value: delta,
            range: "(0, 1)",
        })
    }
}

fn check_open(name: &'static str, v: f64, lo: f64, hi: f64, range: &'static str) -> Result<f64> {
    if v.is_finite() && v > lo && v < hi {
        Ok(v)
    } else {
        Err(Error::Domain {
            name,
            value: v,
            range,
        })
    }
}

/// Worst-case rounds of protocol A for a Werner estimate anywhere on `[0, 2/3]`.
pub fn werner_sample_bound(delta: f64, eps_w: f64) -> Result<u64> {
    check_delta(delta)?;
    check_open("eps_w", eps_w, 0.0, 2.0 / 3.0, "(0, 2/3)")?;
    let gap = 2.0 / 3.0 - eps_w;
    Ok((8.0 * (2.0 / delta).ln() / (eps_w * eps_w * gap * gap)).ceil() as u64)
}

/// Rounds per protocol for a Bell-diagonal estimate with all intermediates
/// at least `x`. Pass the smallest intermediate for a worst-case figure.
pub fn bell_sample_bound(delta: f64, eps_t: f64, x: f64) -> Result<u64> {
    check_delta(delta)?;
    check_closed("x", x, 0.5, 1.0, "(1/2, 1]")?;
    let e = eps_t / 3.0;
    if !(e.is_finite() && e > 0.0 && e < 2.0 * x - 1.0) {
        return Err(Error::Domain {
            name: "eps_t / 3",
            value: e,
            range: "(0, 2x - 1)",
        });
    }
    let margin = -e * e + e * (2.0 * x - 1.0);
    Ok(((8.0 / delta).ln() / (2.0 * margin * margin)).ceil() as u64)
}

/// Probability of a both-up outcome when measuring a Werner state in a
/// common Pauli basis.
pub fn tomography_werner_prob(w: f64) -> Result<f64> {
    check_probability("w", w)?;
    Ok((2.0 - w) / 4.0)
}

/// Failure bound of a tomographic Werner estimate from `n` states.
pub fn tomography_werner_bound(n: u64, eps_w: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyExperiment);
    }
    check_open("eps_w", eps_w, 0.0, f64::INFINITY, "(0, inf)")?;
    Ok((2.0 * (-(n as f64) * eps_w * eps_w / 8.0).exp()).min(1.0))
}

/// Smallest `n` with `2 exp(-n ε²/8) ≤ δ`.
pub fn tomography_werner_samples(delta: f64, eps_w: f64) -> Result<u64> {
    check_delta(delta)?;
    check_open("eps_w", eps_w, 0.0, f64::INFINITY, "(0, inf)")?;
    Ok((8.0 * (2.0 / delta).ln() / (eps_w * eps_w)).ceil() as u64)
}

/// Both-up probabilities in the Z, X and Y bases.
pub fn tomography_bell_probs(q: &BellVector) -> [f64; 3] {
    let [x1, x2, x3] = q.intermediates();
    [0.5 * x1, 0.5 * x2, 0.5 * (1.0 - x3)]
}

/// Failure bound of a tomographic Bell-diagonal estimate with `ns[i]` states
/// measured in basis `i`.
pub fn tomography_bell_bound(ns: [u64; 3], eps: [f64; 3]) -> Result<f64> {
    let mut terms = [0.0; 3];
    for i in 0..3 {
        if ns[i] == 0 {
            return Err(Error::EmptyExperiment);
        }
        check_open("eps", eps[i], 0.0, f64::INFINITY, "(0, inf)")?;
        let half = 0.5 * eps[i];
        terms[i] = (2.0 * (-2.0 * ns[i] as f64 * half * half).exp()).min(1.0);
    }
    Ok(union_complement(terms))
}

/// Smallest common per-basis count `n` meeting `delta`; the total is `3n`.
pub fn tomography_bell_samples(delta: f64, eps: [f64; 3]) -> Result<u64> {
    check_delta(delta)?;
    for e in eps {
        check_open("eps", e, 0.0, f64::INFINITY, "(0, inf)")?;
    }
    let fails = |n: u64| tomography_bell_bound([n; 3], eps).map(|d| d > delta);
    smallest_passing(fails)
}

/// Smallest `n ≥ 1` for which `fails(n)` is false, assuming monotonicity.
pub(crate) fn smallest_passing<F: Fn(u64) -> Result<bool>>(fails: F) -> Result<u64> {
    let mut hi = 1u64;
    while fails(hi)? {
        if hi > 1 << 62 {
            return Err(Error::Regime(
                "no finite sample count meets the target".into(),
            ));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    if lo == 0 {
        return Ok(hi);
    }
    // fails(lo) and !fails(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fails(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Smallest round count with `Σ_m exp(-2 n ε_m²) ≤ delta`.
pub fn required_rounds(eps_left: f64, eps_right: f64, delta: f64) -> Result<u64> {
    check_delta(delta)?;
    if eps_left <= 0.0 || eps_right <= 0.0 {
        return Err(Error::Regime(
            "a deviation threshold is not positive".into(),
        ));
    }
    smallest_passing(|n| Ok(one_sided(n, eps_left) + one_sided(n, eps_right) > delta))
}

/// Smallest common per-protocol round count meeting `delta` on the combined bound.
pub fn required_rounds_bell(eps: [(f64, f64); 3], delta: f64) -> Result<u64> {
    check_delta(delta)?;
    if eps.iter().any(|&(l, r)| l <= 0.0 || r <= 0.0) {
        return Err(Error::Regime(
            "a deviation threshold is not positive".into(),
        ));
    }
    smallest_passing(|n| {
        let d = union_complement(eps.map(|(l, r)| (one_sided(n, l) + one_sided(n, r)).min(1.0)));
        Ok(d > delta)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Consumption {
    /// Expected pairs used up: `Σ (2 - p_i) N_i`.
    pub consumed: f64,
    /// Expected distilled pairs left over: `Σ p_i N_i`.
    pub distilled: f64,
}

pub fn consumed_pairs(ps: &[f64], ns: &[u64]) -> Result<Consumption> {
    if ps.len() != ns.len() {
        return Err(Error::InvalidVector(format!(
            "{} probabilities for {} counts",
            ps.len(),
            ns.len()
        )));
    }
    let mut out = Consumption {
        consumed: 0.0,
        distilled: 0.0,
    };
    for (&p, &n) in ps.iter().zip(ns) {
        check_probability("p", p)?;
        out.consumed += (2.0 - p) * n as f64;
        out.distilled += p * n as f64;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn hoeffding_examples() {
        assert_abs_diff_eq!(
            hoeffding_tail(1_000_000, 2e-3, 0.0, 1.0).unwrap(),
            3.3546262790251185e-4,
            epsilon = 1e-18
        );
        assert_eq!(hoeffding_tail(10, 0.0, 0.0, 1.0).unwrap(), 1.0);
        let one = hoeffding_tail(500, 0.03, 0.0, 1.0).unwrap();
        let two = hoeffding_tail(1000, 0.03, 0.0, 1.0).unwrap();
        assert_relative_eq!(two, one * one, max_relative = 1e-14);
        assert!(hoeffding_tail(0, 0.1, 0.0, 1.0).is_err());
        assert!(hoeffding_tail(1, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn x_to_q_examples() {
        assert_eq!(x_to_q([1.0; 3]).unwrap(), BellVector::PHI_PLUS);
        let q = x_to_q([0.95, 0.9, 0.85]).unwrap().weights();
        for (a, b) in q.iter().zip([0.85, 0.1, 0.05, 0.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let q = x_to_q([2.0 / 3.0; 3]).unwrap().weights();
        for (a, b) in q.iter().zip([0.5, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert!(x_to_q([1.0, 1.0, 0.5]).is_err());
        assert!(x_to_q([0.4, 1.0, 1.0]).is_err());
    }

    #[test]
    fn arbitrary_state_examples() {
        assert_eq!(arbitrary_state_bound(&BellVector::PHI_PLUS, 0.03), 0.03);
        let q = BellVector::new([0.85, 0.05, 0.05, 0.05]).unwrap();
        assert_abs_diff_eq!(arbitrary_state_bound(&q, 0.03), 0.62758, epsilon = 1e-5);
        assert_abs_diff_eq!(
            arbitrary_state_bound(&BellVector::MAXIMALLY_MIXED, 0.03),
            0.03 + 15f64.sqrt() / 4.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn werner_sample_bound_examples() {
        // 8 ln 200 / (1e-4 · (2/3 - 1/100)²) = 982964.906...
        assert_eq!(werner_sample_bound(1e-2, 1e-2).unwrap(), 982_965);
        let half = werner_sample_bound(1e-2, 5e-3).unwrap() as f64;
        let ratio = half / 982_965.0;
        let gap_ratio = ((2.0 / 3.0 - 0.01) / (2.0 / 3.0 - 0.005f64)).powi(2);
        assert_abs_diff_eq!(ratio, 4.0 * gap_ratio, epsilon = 1e-5);
        assert!(werner_sample_bound(1.0 - 1e-12, 0.1).unwrap() > 0);
        assert!(werner_sample_bound(0.0, 0.1).is_err());
        assert!(werner_sample_bound(0.5, 0.7).is_err());
    }

    #[test]
    fn bell_sample_bound_examples() {
        // ln 800 / (2 (0.0085)²) = 42195.50...
        assert_eq!(bell_sample_bound(1e-2, 0.03, 0.95).unwrap(), 42_196);
        let near_half = bell_sample_bound(1e-2, 0.03, 0.5101).unwrap();
        assert!(near_half > 100_000_000);
        assert!(bell_sample_bound(1e-2, 0.03, 0.504).is_err());
        let e = 0.01f64;
        let m = -e * e + e * 0.9;
        let raw = |d: f64| (8.0 / d).ln() / (2.0 * m * m);
        assert_abs_diff_eq!(
            raw(1e-2 / 8.0) - raw(1e-2),
            8f64.ln() / (2.0 * m * m),
            epsilon = 1e-6
        );
    }

    #[test]
    fn tomography_examples() {
        assert_eq!(tomography_werner_samples(1e-2, 1e-2).unwrap(), 423_866);
        assert_eq!(tomography_werner_prob(0.0).unwrap(), 0.5);
        assert_abs_diff_eq!(tomography_werner_prob(0.4).unwrap(), 0.4, epsilon = 1e-15);
        let n = 423_866;
        assert!(tomography_werner_bound(n, 1e-2).unwrap() <= 1e-2);
        assert!(tomography_werner_bound(n - 1, 1e-2).unwrap() > 1e-2);

        let q = BellVector::new([0.85, 0.1, 0.05, 0.0]).unwrap();
        let p = tomography_bell_probs(&q);
        for (a, b) in p.iter().zip([0.475, 0.45, 0.075]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }

        let d = tomography_bell_bound([1_000_000; 3], [1e-2; 3]).unwrap();
        let expected = 6.0 * (-50f64).exp();
        assert!((d - expected).abs() <= 1e-6 * expected, "{d}");

        let d = tomography_bell_bound([10_000; 3], [0.03; 3]).unwrap();
        let t = 2.0 * (-(10_000.0f64) * 0.03 * 0.03 / 2.0).exp();
        assert_abs_diff_eq!(d, 1.0 - (1.0 - t).powi(3), epsilon = 1e-14);
    }

    #[test]
    fn bell_tomography_samples_meet_target() {
        let n = tomography_bell_samples(1e-2, [1e-2; 3]).unwrap();
        assert!(tomography_bell_bound([n; 3], [1e-2; 3]).unwrap() <= 1e-2);
        assert!(tomography_bell_bound([n - 1; 3], [1e-2; 3]).unwrap() > 1e-2);
    }

    #[test]
    fn consumption_examples() {
        let c = consumed_pairs(&[0.5], &[1000]).unwrap();
        assert_eq!((c.consumed, c.distilled), (1500.0, 500.0));
        let c = consumed_pairs(&[0.34], &[1000]).unwrap();
        assert_abs_diff_eq!(c.consumed, 1660.0, epsilon = 1e-9);
        // (2 - 0.4525 + 2 - 0.41 + 2 - 0.3725) · 2e5
        let c = consumed_pairs(&[0.4525, 0.41, 0.3725], &[200_000; 3]).unwrap();
        assert_abs_diff_eq!(c.consumed, 953_000.0, epsilon = 1e-6);
        assert_abs_diff_eq!(c.distilled, 247_000.0, epsilon = 1e-6);
        assert!(consumed_pairs(&[0.5], &[1, 2]).is_err());
    }

    #[test]
    fn required_rounds_is_tight() {
        let n = required_rounds(0.002975, 0.003025, 1e-2).unwrap();
        let d = |n: u64| one_sided(n, 0.002975) + one_sided(n, 0.003025);
        assert!(d(n) <= 1e-2 && d(n - 1) > 1e-2);
        assert!(required_rounds(-0.1, 0.1, 1e-2).is_err());
    }

    #[test]
    fn union_complement_is_stable() {
        let tiny = 1e-30;
        assert_abs_diff_eq!(union_complement([tiny; 3]), 3e-30, epsilon = 1e-40);
        assert_eq!(union_complement([1.0, 0.0, 0.0]), 1.0);
        assert_abs_diff_eq!(union_complement([0.5, 0.5]), 0.75, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn x_to_q_inverts_intermediates(raw in prop::array::uniform4(0.0f64..1.0)) {
            let s: f64 = raw.iter().sum();
            prop_assume!(s > 1e-6);
            let q = BellVector::new(raw.map(|v| v / s)).unwrap();
            let back = x_to_q_weights(q.intermediates());
            for (a, b) in back.iter().zip(q.weights()) {
                prop_assert!((a - b).abs() < 1e-15);
            }
        }

        #[test]
        fn tomography_bell_bound_decreases_in_n(n in 1u64..100_000, eps in 0.001f64..0.1) {
            let a = tomography_bell_bound([n; 3], [eps; 3]).unwrap();
            let b = tomography_bell_bound([n + 1; 3], [eps; 3]).unwrap();
            prop_assert!(b <= a);
        }
    }
}

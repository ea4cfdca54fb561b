//! Inversion of distillation statistics into Bell-diagonal parameters.

mod bisection;
mod bounds;
mod report;

pub use bisection::{bisection_search, iteration_cap, Bisection};
pub use bounds::{
    arbitrary_state_bound, bell_sample_bound, consumed_pairs, hoeffding_tail, required_rounds,
    required_rounds_bell, tomography_bell_bound, tomography_bell_probs, tomography_bell_samples,
    tomography_werner_bound, tomography_werner_prob, tomography_werner_samples,
    werner_sample_bound, x_to_q, Consumption,
};
pub use report::EstimateReport;

use crate::bellvec::werner_weights;
use crate::error::{check_probability, Error, Result};
use crate::experiment::{ExperimentLog, Orientation, Parameterization, SuccessCurve};
use crate::protocols::Protocol;
use bounds::{one_sided, union_complement, x_to_q_weights};

/// Default search bracket for the Werner parameter: the distillable range.
pub const WERNER_BRACKET: (f64, f64) = (0.0, 2.0 / 3.0);

fn check_eps(name: &'static str, eps: f64, hi: f64, range: &'static str) -> Result<f64> {
    if eps.is_finite() && eps > 0.0 && eps < hi {
        Ok(eps)
    } else {
        Err(Error::Domain {
            name,
            value: eps,
            range,
        })
    }
}

fn check_rounds(n: u64) -> Result<u64> {
    if n == 0 {
        Err(Error::EmptyExperiment)
    } else {
        Ok(n)
    }
}

/// `(ε_L, ε_R)` such that a deviation of the parameter by `eps` in either
/// direction moves the statistic by at least these amounts.
pub fn deviation_thresholds(
    curve: &SuccessCurve,
    p_hat: f64,
    estimate: f64,
    eps: f64,
) -> (f64, f64) {
    // The curve is evaluated as a polynomial, including past the bracket.
    match curve.orientation() {
        Orientation::Decreasing => (
            p_hat - curve.eval(estimate + eps),
            curve.eval(estimate - eps) - p_hat,
        ),
        Orientation::Increasing => (
            p_hat - curve.eval(estimate - eps),
            curve.eval(estimate + eps) - p_hat,
        ),
    }
}

/// A flat curve carries no information about the parameter.
fn check_slope(curve: &SuccessCurve) -> Result<()> {
    if curve.form.slope > 0.0 {
        Ok(())
    } else {
        Err(Error::Degenerate(format!(
            "protocol {} statistic does not depend on the parameter",
            curve.protocol
        )))
    }
}

fn werner_report(w_hat: f64, eps: (f64, f64), n: u64, p_hat: f64, clamped: bool) -> EstimateReport {
    let delta_raw = one_sided(n, eps.0) + one_sided(n, eps.1);
    EstimateReport {
        w_hat: Some(w_hat),
        q_hat: werner_weights(w_hat),
        x_hat: None,
        eps_left: vec![eps.0],
        eps_right: vec![eps.1],
        delta: delta_raw.min(1.0),
        clamped: vec![clamped],
        consumed: (2.0 - p_hat) * n as f64,
        valid: true,
        delta_raw,
    }
}

/// Werner estimate by inverting a protocol-A success curve.
pub fn estimate_werner_from_curve(
    curve: &SuccessCurve,
    p_hat: f64,
    n: u64,
    eps_w: f64,
    bracket: (f64, f64),
) -> Result<EstimateReport> {
    if curve.protocol != Protocol::A {
        return Err(Error::ProtocolMismatch {
            expected: 'a',
            found: curve.protocol.tag(),
        });
    }
    if curve.parameterization != Parameterization::Werner {
        return Err(Error::Domain {
            name: "parameterization",
            value: f64::NAN,
            range: "Werner",
        });
    }
    check_slope(curve)?;
    check_probability("p_hat", p_hat)?;
    check_rounds(n)?;
    check_eps("eps_w", eps_w, 2.0 / 3.0, "(0, 2/3)")?;
    let (a, b) = bracket;
    if !(0.0 <= a && a < b && b <= 1.0) {
        return Err(Error::Domain {
            name: "bracket width",
            value: b - a,
            range: "0 <= a < b <= 1",
        });
    }
    let found = bisection_search(|w| curve.eval(w), a, b, p_hat, eps_w)?;
    let eps = deviation_thresholds(curve, p_hat, found.root, eps_w);
    Ok(werner_report(found.root, eps, n, p_hat, found.clamped))
}

/// Werner estimate from a protocol-A log, searching the default bracket.
pub fn estimate_werner(log: &ExperimentLog, eps_w: f64) -> Result<EstimateReport> {
    estimate_werner_in(log, eps_w, WERNER_BRACKET)
}

pub fn estimate_werner_in(
    log: &ExperimentLog,
    eps_w: f64,
    bracket: (f64, f64),
) -> Result<EstimateReport> {
    if log.protocol != Protocol::A {
        return Err(Error::ProtocolMismatch {
            expected: 'a',
            found: log.protocol.tag(),
        });
    }
    let curve = log.success_curve(Parameterization::Werner)?;
    estimate_werner_from_curve(&curve, log.p_hat(), log.n_rounds, eps_w, bracket)
}

/// Closed-form Werner estimate for a control copy whose mean survival under
/// memory depolarization is `s_avg`, with otherwise perfect devices.
pub fn estimate_werner_depolarized(
    p_hat: f64,
    s_avg: f64,
    n: u64,
    eps_w: f64,
) -> Result<EstimateReport> {
    check_probability("p_hat", p_hat)?;
    check_rounds(n)?;
    check_eps("eps_w", eps_w, 2.0 / 3.0, "(0, 2/3)")?;
    if !(s_avg.is_finite() && s_avg > 0.0 && s_avg <= 1.0) {
        return Err(Error::Domain {
            name: "s_avg",
            value: s_avg,
            range: "(0, 1]",
        });
    }
    // (1 - w)² = (4p - 1)/S, restricted to w in [0, 2/3].
    let r = (4.0 * p_hat - 1.0) / s_avg;
    let (w_hat, clamped) = if r > 1.0 {
        (0.0, true)
    } else if r < 1.0 / 9.0 {
        (2.0 / 3.0, true)
    } else {
        (1.0 - r.sqrt(), false)
    };
    let lin = 2.0 * eps_w * (1.0 - w_hat);
    let sq = eps_w * eps_w;
    let eps = (0.25 * s_avg * (lin - sq), 0.25 * s_avg * (lin + sq));
    Ok(werner_report(w_hat, eps, n, p_hat, clamped))
}

/// Closed-form Werner estimate with perfect devices and no memory decay.
pub fn estimate_werner_noiseless(p_hat: f64, n: u64, eps_w: f64) -> Result<EstimateReport> {
    estimate_werner_depolarized(p_hat, 1.0, n, eps_w)
}

fn bell_report(
    x_hat: [f64; 3],
    eps: [(f64, f64); 3],
    ns: [u64; 3],
    p_hats: [f64; 3],
    clamped: [bool; 3],
    tolerance: f64,
) -> EstimateReport {
    let per_channel =
        (0..3).map(|i| (one_sided(ns[i], eps[i].0) + one_sided(ns[i], eps[i].1)).min(1.0));
    let delta = union_complement(per_channel);
    let (q_hat, valid) = project(x_to_q_weights(x_hat), tolerance);
    EstimateReport {
        w_hat: None,
        q_hat,
        x_hat: Some(x_hat),
        eps_left: eps.iter().map(|e| e.0).collect(),
        eps_right: eps.iter().map(|e| e.1).collect(),
        delta,
        clamped: clamped.to_vec(),
        consumed: (0..3).map(|i| (2.0 - p_hats[i]) * ns[i] as f64).sum(),
        valid,
        delta_raw: delta,
    }
}

/// Zeroes negative entries within `tolerance` and renormalizes. Anything
/// more negative is left as is and reported invalid.
fn project(q: [f64; 4], tolerance: f64) -> ([f64; 4], bool) {
    if q.iter().any(|&v| v < -tolerance) {
        return (q, false);
    }
    if q.iter().all(|&v| v >= 0.0) {
        return (q, true);
    }
    let clipped = q.map(|v| v.max(0.0));
    let sum: f64 = clipped.iter().sum();
    (clipped.map(|v| v / sum), true)
}

/// Bell-diagonal estimate from three success curves for protocols A, B, C.
pub fn estimate_bell_from_curves(
    curves: [&SuccessCurve; 3],
    p_hats: [f64; 3],
    ns: [u64; 3],
    eps: [f64; 3],
) -> Result<EstimateReport> {
    let mut x_hat = [0.0; 3];
    let mut thresholds = [(0.0, 0.0); 3];
    let mut clamped = [false; 3];
    for (i, protocol) in Protocol::ALL.into_iter().enumerate() {
        let curve = curves[i];
        if curve.protocol != protocol {
            return Err(Error::ProtocolMismatch {
                expected: protocol.tag(),
                found: curve.protocol.tag(),
            });
        }
        if curve.parameterization != Parameterization::Bell {
            return Err(Error::Domain {
                name: "parameterization",
                value: f64::NAN,
                range: "Bell",
            });
        }
        check_slope(curve)?;
        check_probability("p_hat", p_hats[i])?;
        check_rounds(ns[i])?;
        check_eps("eps", eps[i], 0.5, "(0, 1/2)")?;
        let found = bisection_search(|x| curve.eval(x), 0.5, 1.0, p_hats[i], eps[i])?;
        x_hat[i] = found.root;
        clamped[i] = found.clamped;
        thresholds[i] = deviation_thresholds(curve, p_hats[i], found.root, eps[i]);
    }
    let tolerance = eps.iter().map(|e| e.powi(3)).sum();
    Ok(bell_report(
        x_hat, thresholds, ns, p_hats, clamped, tolerance,
    ))
}

/// Bell-diagonal estimate from logs of protocols A, B and C, in that order.
pub fn estimate_bell(logs: [&ExperimentLog; 3], eps: [f64; 3]) -> Result<EstimateReport> {
    let mut curves = Vec::with_capacity(3);
    for (log, protocol) in logs.iter().zip(Protocol::ALL) {
        if log.protocol != protocol {
            return Err(Error::ProtocolMismatch {
                expected: protocol.tag(),
                found: log.protocol.tag(),
            });
        }
        curves.push(log.success_curve(Parameterization::Bell)?);
    }
    estimate_bell_from_curves(
        [&curves[0], &curves[1], &curves[2]],
        logs.map(ExperimentLog::p_hat),
        logs.map(|l| l.n_rounds),
        eps,
    )
}

/// Closed-form Bell-diagonal estimate with perfect devices.
pub fn estimate_bell_noiseless(
    p_hats: [f64; 3],
    ns: [u64; 3],
    eps: [f64; 3],
) -> Result<EstimateReport> {
    let mut x_hat = [0.0; 3];
    let mut thresholds = [(0.0, 0.0); 3];
    let mut clamped = [false; 3];
    for i in 0..3 {
        check_probability("p_hat", p_hats[i])?;
        check_rounds(ns[i])?;
        check_eps("eps", eps[i], 0.5, "(0, 1/2)")?;
        let disc = 4.0 * p_hats[i] - 1.0;
        (x_hat[i], clamped[i]) = if disc < 0.0 {
            (0.5, true)
        } else if disc > 1.0 {
            (1.0, true)
        } else {
            (0.5 * (1.0 + disc.sqrt()), false)
        };
        let lin = eps[i] * (2.0 * x_hat[i] - 1.0);
        let sq = eps[i] * eps[i];
        thresholds[i] = (lin - sq, lin + sq);
    }
    let tolerance = eps.iter().map(|e| e.powi(3)).sum();
    Ok(bell_report(
        x_hat, thresholds, ns, p_hats, clamped, tolerance,
    ))
}

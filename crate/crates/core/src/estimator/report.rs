use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

/// Result of a Werner or Bell-diagonal estimate.
///
/// Per-channel vectors have one entry for a Werner estimate and three, in
/// protocol order, for a Bell-diagonal one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub w_hat: Option<f64>,
    pub q_hat: [f64; 4],
    pub x_hat: Option<[f64; 3]>,
    pub eps_left: Vec<f64>,
    pub eps_right: Vec<f64>,
    /// Failure-probability bound, capped at 1.
    pub delta: f64,
    pub clamped: Vec<bool>,
    /// Expected pairs consumed by the runs behind the estimate.
    pub consumed: f64,
    /// False when `q_hat` has a negative entry beyond the search tolerance.
    pub valid: bool,
    /// Uncapped bound; for a Werner estimate it can reach 2.
    #[serde(skip)]
    pub delta_raw: f64,
}

impl EstimateReport {
    pub fn any_clamped(&self) -> bool {
        self.clamped.iter().any(|&c| c)
    }

    /// Flat `key=value` lines; vectors are comma-separated, absent fields empty.
    pub fn to_key_value(&self) -> String {
        fn join<T: fmt::Display>(v: &[T]) -> String {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
        let mut out = String::new();
        let w = self.w_hat.map(|w| w.to_string()).unwrap_or_default();
        let x = self.x_hat.map(|x| join(&x)).unwrap_or_default();
        let _ = writeln!(out, "w_hat={w}");
        let _ = writeln!(out, "q_hat={}", join(&self.q_hat));
        let _ = writeln!(out, "x_hat={x}");
        let _ = writeln!(out, "eps_left={}", join(&self.eps_left));
        let _ = writeln!(out, "eps_right={}", join(&self.eps_right));
        let _ = writeln!(out, "delta={}", self.delta);
        let _ = writeln!(out, "clamped={}", join(&self.clamped));
        let _ = writeln!(out, "consumed={}", self.consumed);
        let _ = writeln!(out, "valid={}", self.valid);
        out
    }
}

impl fmt::Display for EstimateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_value())
    }
}

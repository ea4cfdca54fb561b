use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    /// The target lay outside the range of `F` on the bracket.
    pub clamped: bool,
    pub iterations: u32,
}

/// Iteration cap `⌈log₂((b − a)/ε³)⌉`.
pub fn iteration_cap(a0: f64, b0: f64, eps: f64) -> u32 {
    ((b0 - a0) / eps.powi(3)).log2().ceil().max(0.0) as u32
}

/// Inverts a continuous monotone `f` on `[a0, b0]` to tolerance `eps³`.
///
/// Works for either direction of monotonicity by comparing the sign of
/// `f(mid) - target` against that at the left end of the current bracket.
/// A target outside the range of `f` yields the endpoint whose value is
/// closest, with `clamped` set.
pub fn bisection_search<F: Fn(f64) -> f64>(
    f: F,
    a0: f64,
    b0: f64,
    target: f64,
    eps: f64,
) -> Result<Bisection> {
    if !(a0.is_finite() && b0.is_finite() && a0 < b0) {
        return Err(Error::Domain {
            name: "b0 - a0",
            value: b0 - a0,
            range: "(0, inf)",
        });
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::Domain {
            name: "eps",
            value: eps,
            range: "(0, inf)",
        });
    }
    if !target.is_finite() {
        return Err(Error::Domain {
            name: "target",
            value: target,
            range: "finite",
        });
    }
    let (fa, fb) = (f(a0), f(b0));
    if target == fa {
        return Ok(Bisection {
            root: a0,
            clamped: false,
            iterations: 0,
        });
    }
    if target == fb {
        return Ok(Bisection {
            root: b0,
            clamped: false,
            iterations: 0,
        });
    }
    if target < fa.min(fb) || target > fa.max(fb) {
        let root = if (target - fa).abs() <= (target - fb).abs() {
            a0
        } else {
            b0
        };
        return Ok(Bisection {
            root,
            clamped: true,
            iterations: 0,
        });
    }

    let tol = eps.powi(3);
    let cap = iteration_cap(a0, b0, eps);
    let (mut a, mut b) = (a0, b0);
    let mut f_left = fa;
    let mut mid = 0.5 * (a + b);
    for n in 1..=cap.max(1) {
        mid = 0.5 * (a + b);
        let fm = f(mid);
        if fm == target || 0.5 * (b - a) <= tol {
            return Ok(Bisection {
                root: mid,
                clamped: false,
                iterations: n,
            });
        }
        if (fm - target).signum() == (f_left - target).signum() {
            a = mid;
            f_left = fm;
        } else {
            b = mid;
        }
    }
    Ok(Bisection {
        root: mid,
        clamped: false,
        iterations: cap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad(x: f64) -> f64 {
        x * x - x + 0.5
    }

    #[test]
    fn inverts_the_noiseless_quadratic() {
        let r = bisection_search(quad, 0.5, 1.0, 0.34, 0.01).unwrap();
        assert!((r.root - 0.8).abs() <= 1e-6);
        assert!(!r.clamped);
        assert!(r.iterations <= iteration_cap(0.5, 1.0, 0.01));
    }

    #[test]
    fn endpoints_and_clamping() {
        let r = bisection_search(quad, 0.5, 1.0, 0.25, 0.01).unwrap();
        assert_eq!((r.root, r.clamped), (0.5, false));
        let r = bisection_search(quad, 0.5, 1.0, 0.6, 0.01).unwrap();
        assert_eq!((r.root, r.clamped), (1.0, true));
        let r = bisection_search(quad, 0.5, 1.0, 0.1, 0.01).unwrap();
        assert_eq!((r.root, r.clamped), (0.5, true));
    }

    #[test]
    fn decreasing_functions() {
        let f = |w: f64| ((1.0 - w) * (1.0 - w) + 1.0) / 4.0;
        let r = bisection_search(f, 0.0, 2.0 / 3.0, 0.34, 0.01).unwrap();
        assert!((r.root - 0.4).abs() <= 1e-6);
        let r = bisection_search(f, 0.0, 2.0 / 3.0, 0.9, 0.01).unwrap();
        assert_eq!((r.root, r.clamped), (0.0, true));
    }

    #[test]
    fn iteration_cap_value() {
        // log2(0.5 / 1e-6) = 18.93
        assert_eq!(iteration_cap(0.5, 1.0, 0.01), 19);
    }

    #[test]
    fn rejects_bad_brackets() {
        assert!(bisection_search(quad, 1.0, 0.5, 0.3, 0.01).is_err());
        assert!(bisection_search(quad, 0.5, 1.0, 0.3, 0.0).is_err());
        assert!(bisection_search(quad, 0.5, 1.0, f64::NAN, 0.01).is_err());
    }

    proptest! {
        #[test]
        fn recovers_roots(x in 0.5f64..=1.0, eps in 1e-3f64..0.1, decreasing in any::<bool>()) {
            let tol = eps.powi(3);
            if decreasing {
                let f = |t: f64| quad(1.5 - t);
                let r = bisection_search(f, 0.5, 1.0, f(1.5 - x), eps).unwrap();
                prop_assert!((r.root - (1.5 - x)).abs() <= tol + 1e-15);
            } else {
                let r = bisection_search(quad, 0.5, 1.0, quad(x), eps).unwrap();
                prop_assert!((r.root - x).abs() <= tol + 1e-15);
            }
        }
    }
}

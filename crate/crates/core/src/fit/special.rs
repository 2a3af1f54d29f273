//! Error function and its inverse.

use std::f64::consts::PI;

/// Error function, accurate to a few ulp over the whole real line.
pub fn erf_eval(x: f64) -> f64 {
    libm::erf(x)
}

/// Inverse error function on `(−1, 1)`; returns ±∞ at ±1 and NaN outside.
pub fn erf_inv(y: f64) -> f64 {
    if y.is_nan() || y.abs() > 1.0 {
        return f64::NAN;
    }
    if y == 1.0 {
        return f64::INFINITY;
    }
    if y == -1.0 {
        return f64::NEG_INFINITY;
    }
    if y == 0.0 {
        return 0.0;
    }
    // Winitzki's closed-form guess, then Halley steps on erf(x) − y.
    let a = 0.147;
    let ln = (1.0 - y * y).ln();
    let t = 2.0 / (PI * a) + 0.5 * ln;
    let mut x = y.signum() * ((t * t - ln / a).sqrt() - t).sqrt();
    for _ in 0..6 {
        let err = erf_eval(x) - y;
        let slope = 2.0 / PI.sqrt() * (-x * x).exp();
        if slope == 0.0 {
            break;
        }
        let step = err / slope;
        x -= step / (1.0 + x * step);
        if step.abs() <= 1e-17 * x.abs().max(1e-300) {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    /// erf by Simpson integration of the defining integral with step h.
    fn erf_quadrature(x: f64, h: f64) -> f64 {
        let n = ((x.abs() / h).ceil() as usize).max(2) & !1usize;
        let n = n.max(2);
        let step = x / n as f64;
        let f = |t: f64| (-t * t).exp();
        let mut sum = f(0.0) + f(x);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * f(i as f64 * step);
        }
        2.0 / PI.sqrt() * sum * step / 3.0
    }

    #[test]
    fn erf_fixed_points() {
        assert_eq!(erf_eval(0.0), 0.0);
        assert!((erf_eval(6.0) - 1.0).abs() < 1e-10);
        assert_eq!(erf_eval(-1.3), -erf_eval(1.3));
    }

    #[test]
    fn erf_matches_defining_integral() {
        let reference = erf_quadrature(0.4950, 1e-6);
        assert!((reference - 0.5161).abs() < 1e-4, "{reference}");
        assert!((erf_eval(0.4950) - reference).abs() < 1e-10);
        for x in [-5.5, -2.0, -0.3, 0.01, 0.8, 1.7, 3.2, 6.0] {
            let q = erf_quadrature(x, 1e-4);
            assert!((erf_eval(x) - q).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn erf_inv_round_trips() {
        for y in [-0.999, -0.52, -0.1, 1e-9, 0.3, 0.52, 0.9, 0.999999] {
            let x = erf_inv(y);
            assert!((erf_eval(x) - y).abs() < 1e-15, "y = {y}");
        }
        assert_eq!(erf_inv(0.0), 0.0);
        assert!(erf_inv(1.0).is_infinite());
        assert!(erf_inv(1.5).is_nan());
    }

    #[test]
    fn erf_inv_052_by_bisection() {
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if erf_eval(mid) < 0.52 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((erf_inv(0.52) - lo).abs() < 1e-14);
        assert!((2.0 * lo - 0.998863).abs() < 1e-6);
    }
}

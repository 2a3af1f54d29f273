//! Error-function fit of an edge-spread profile.
//!
//! Model: `V(x) = V_max/2 · (1 ± erf((x − x0)/D))`, `+` for a rising edge and
//! `−` for a falling one. `D` is the inverse of the coefficient multiplying
//! `x` inside the erf; the 24 %–76 % rise distance is `2·erfinv(0.52)·D`.
//!
//! The three parameters are found by Levenberg–Marquardt in normalised
//! units (x centred and scaled by the half span of the profile, values
//! scaled by the open-side plateau) so that the stopping thresholds do not
//! depend on the physical units of the data.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

use super::special::{erf_eval, erf_inv};
use super::visibility::EsfProfile;
use crate::error::{Error, Result};

/// Columns required on each side of the half-maximum crossing.
pub const MIN_PLATEAU_COLUMNS: usize = 3;
const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-10;
const GRADIENT_TOLERANCE: f64 = 1e-12;

/// Direction of the visibility edge along increasing `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsfSign {
    Falling,
    Rising,
}

impl EsfSign {
    fn factor(self) -> f64 {
        match self {
            EsfSign::Falling => -1.0,
            EsfSign::Rising => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            EsfSign::Falling => EsfSign::Rising,
            EsfSign::Rising => EsfSign::Falling,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EsfSign::Falling => "falling",
            EsfSign::Rising => "rising",
        }
    }

    /// Guess the direction from the mean of the outermost columns.
    pub fn detect(profile: &EsfProfile) -> Self {
        let k = plateau_columns(profile.len());
        let n = profile.len();
        let head = mean(&profile.mean[..k.min(n)]);
        let tail = mean(&profile.mean[n.saturating_sub(k)..]);
        if head > tail {
            EsfSign::Falling
        } else {
            EsfSign::Rising
        }
    }
}

impl std::str::FromStr for EsfSign {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "falling" => Ok(EsfSign::Falling),
            "rising" => Ok(EsfSign::Rising),
            other => Err(format!("unknown edge sign `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    #[default]
    Uniform,
    /// Weight each column by `1/std²` of the band average.
    InverseVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EsfFitOptions {
    pub weighting: Weighting,
}

/// Result of the erf fit. Parameter order in `covariance` is
/// `(v_max, x0, width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsfFit {
    pub v_max: f64,
    /// Edge centre [m].
    pub x0: f64,
    /// Width `D` [m].
    pub width: f64,
    pub sign: EsfSign,
    pub covariance: [[f64; 3]; 3],
    pub converged: bool,
    pub iterations: usize,
    /// RMS of the unweighted residuals.
    pub rms_residual: f64,
}

impl EsfFit {
    pub fn evaluate(&self, x: f64) -> f64 {
        0.5 * self.v_max * (1.0 + self.sign.factor() * erf_eval((x - self.x0) / self.width))
    }

    /// One-sigma uncertainty of `D`.
    pub fn width_sigma(&self) -> f64 {
        self.covariance[2][2].max(0.0).sqrt()
    }

    /// A plateau above one is unphysical for a visibility.
    pub fn v_max_out_of_range(&self) -> bool {
        !(self.v_max > 0.0 && self.v_max <= 1.0)
    }
}

/// `2·erfinv(0.52)·D ≈ 0.99886·D`: the distance over which the edge rises
/// from 24 % to 76 % of its plateau.
pub fn rise_width_24_76(fit: &EsfFit) -> f64 {
    2.0 * erf_inv(0.52) * fit.width
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len().max(1) as f64
}

fn plateau_columns(n: usize) -> usize {
    (n / 10).max(MIN_PLATEAU_COLUMNS)
}

/// First position, walking from the closed side, where the profile reaches
/// `level`; linear interpolation between columns.
fn crossing(x: &[f64], y: &[f64], level: f64) -> Option<(f64, usize)> {
    for i in 0..x.len() - 1 {
        if y[i] < level && y[i + 1] >= level {
            let t = (level - y[i]) / (y[i + 1] - y[i]);
            return Some((x[i] + t * (x[i + 1] - x[i]), i + 1));
        }
    }
    None
}

struct Problem {
    x: Vec<f64>,
    y: Vec<f64>,
    weights: Vec<f64>,
    sign: f64,
}

impl Problem {
    fn model_and_jacobian(&self, p: &Vector3<f64>, xi: f64) -> (f64, Vector3<f64>) {
        let (v, x0, d) = (p[0], p[1], p[2]);
        let t = (xi - x0) / d;
        let e = erf_eval(t);
        let g = 2.0 / PI.sqrt() * (-t * t).exp();
        let m = 0.5 * v * (1.0 + self.sign * e);
        let jac = Vector3::new(
            0.5 * (1.0 + self.sign * e),
            -0.5 * v * self.sign * g / d,
            -0.5 * v * self.sign * g * t / d,
        );
        (m, jac)
    }

    /// Weighted normal matrix, gradient `Jᵀe` and weighted SSR.
    fn linearize(&self, p: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>, f64) {
        let mut jtj = Matrix3::zeros();
        let mut jte = Vector3::zeros();
        let mut ssr = 0.0;
        for ((&xi, &yi), &w) in self.x.iter().zip(&self.y).zip(&self.weights) {
            let (m, jac) = self.model_and_jacobian(p, xi);
            let (e, jw) = (w * (yi - m), w * jac);
            jtj += jw * jw.transpose();
            jte += jw * e;
            ssr += e * e;
        }
        (jtj, jte, ssr)
    }

    fn ssr(&self, p: &Vector3<f64>) -> f64 {
        self.x
            .iter()
            .zip(&self.y)
            .zip(&self.weights)
            .map(|((&xi, &yi), &w)| {
                let e = w * (yi - self.model_and_jacobian(p, xi).0);
                e * e
            })
            .sum()
    }
}

/// Fit with default options (unweighted least squares).
pub fn fit_esf(profile: &EsfProfile, sign: EsfSign) -> Result<EsfFit> {
    fit_esf_with(profile, sign, EsfFitOptions::default())
}

pub fn fit_esf_with(profile: &EsfProfile, sign: EsfSign, options: EsfFitOptions) -> Result<EsfFit> {
    let n = profile.len();
    if n < 2 * MIN_PLATEAU_COLUMNS + 1 {
        return Err(Error::InsufficientPlateau {
            below: 0,
            above: n,
            min: MIN_PLATEAU_COLUMNS,
        });
    }

    // Work in rising order: closed side first, open plateau last.
    let (xs, ys): (Vec<f64>, Vec<f64>) = match sign {
        EsfSign::Rising => (profile.x.clone(), profile.mean.clone()),
        EsfSign::Falling => (
            profile.x.iter().rev().copied().collect(),
            profile.mean.iter().rev().copied().collect(),
        ),
    };
    let k = plateau_columns(n);
    let open = mean(&ys[n - k..]);
    let closed = mean(&ys[..k]);
    if !(open.is_finite() && open > 0.0 && closed < 0.5 * open) {
        return Err(Error::NoTransition);
    }
    let (x_half, idx) = crossing(&xs, &ys, 0.5 * open).ok_or(Error::NoTransition)?;
    let (below, above) = (idx, n - idx);
    if below < MIN_PLATEAU_COLUMNS || above < MIN_PLATEAU_COLUMNS {
        return Err(Error::InsufficientPlateau {
            below,
            above,
            min: MIN_PLATEAU_COLUMNS,
        });
    }
    let spacing = (profile.x[n - 1] - profile.x[0]) / (n - 1) as f64;
    let d_init = match (crossing(&xs, &ys, 0.24 * open), crossing(&xs, &ys, 0.76 * open)) {
        (Some((a, _)), Some((b, _))) if (b - a).abs() > 0.0 => (b - a).abs() / (2.0 * erf_inv(0.52)),
        _ => spacing,
    };

    // Normalised coordinates.
    let x_center = 0.5 * (profile.x[0] + profile.x[n - 1]);
    let x_scale = 0.5 * (profile.x[n - 1] - profile.x[0]);
    let y_scale = open;
    let weights = match options.weighting {
        Weighting::Uniform => vec![1.0; n],
        Weighting::InverseVariance => {
            let positive: Vec<f64> = profile.std.iter().copied().filter(|s| *s > 0.0).collect();
            if positive.is_empty() {
                vec![1.0; n]
            } else {
                let floor = positive.iter().copied().fold(f64::INFINITY, f64::min);
                let typical = mean(&positive);
                profile.std.iter().map(|&s| typical / s.max(floor)).collect()
            }
        }
    };
    let problem = Problem {
        x: profile.x.iter().map(|x| (x - x_center) / x_scale).collect(),
        y: profile.mean.iter().map(|y| y / y_scale).collect(),
        weights,
        sign: sign.factor(),
    };

    let mut p = Vector3::new(1.0, (x_half - x_center) / x_scale, d_init / x_scale);
    let (mut jtj, mut jte, mut ssr) = problem.linearize(&p);
    let mut lambda = 1e-3 * jtj.diagonal().max();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        if jte.amax() < GRADIENT_TOLERANCE {
            converged = true;
            break;
        }
        iterations += 1;
        let mut damped = jtj;
        for i in 0..3 {
            damped[(i, i)] += lambda * jtj[(i, i)].max(1e-300);
        }
        let Some(step) = damped.cholesky().map(|c| c.solve(&jte)) else {
            lambda *= 4.0;
            continue;
        };
        let small_step = step.norm() <= STEP_TOLERANCE * p.norm();
        let candidate = p + step;
        let trial = if candidate[2] > 0.0 {
            problem.ssr(&candidate)
        } else {
            f64::INFINITY
        };
        if trial <= ssr {
            p = candidate;
            (jtj, jte, ssr) = problem.linearize(&p);
            lambda = (lambda / 3.0).max(1e-300);
        } else {
            lambda *= 4.0;
        }
        if small_step {
            converged = true;
            break;
        }
    }

    // Covariance from the residual variance and the local quadratic model.
    let dof = (n - 3) as f64;
    let residual_var = ssr / dof;
    let cov_n = jtj.try_inverse().unwrap_or_else(|| Matrix3::from_element(f64::NAN)) * residual_var;
    let scale = [y_scale, x_scale, x_scale];
    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, value) in row.iter_mut().enumerate() {
            *value = cov_n[(i, j)] * scale[i] * scale[j];
        }
    }

    let fit = EsfFit {
        v_max: p[0] * y_scale,
        x0: p[1] * x_scale + x_center,
        width: p[2] * x_scale,
        sign,
        covariance,
        converged,
        iterations,
        rms_residual: 0.0,
    };
    let rms = (profile
        .x
        .iter()
        .zip(&profile.mean)
        .map(|(&x, &y)| (y - fit.evaluate(x)).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(EsfFit {
        rms_residual: rms,
        ..fit
    })
}

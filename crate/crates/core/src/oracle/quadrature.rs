//! Fixed-order 1-D quadrature rules and moment helpers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Trapezoid,
    #[default]
    GaussLegendre,
}

impl Rule {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rule::Trapezoid => "trapezoid",
            Rule::GaussLegendre => "gauss_legendre",
        }
    }
}

impl std::str::FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trapezoid" => Ok(Rule::Trapezoid),
            "gauss_legendre" | "gl" => Ok(Rule::GaussLegendre),
            other => Err(Error::InvalidConfig(format!("unknown quadrature rule '{other}'"))),
        }
    }
}

type NodeTable = Arc<(Vec<f64>, Vec<f64>)>;

/// Gauss–Legendre nodes and weights on [−1, 1], computed once per order.
fn gauss_legendre(n: usize) -> NodeTable {
    static CACHE: OnceLock<Mutex<HashMap<usize, NodeTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("quadrature cache poisoned").get(&n) {
        return Arc::clone(t);
    }
    let table = Arc::new(legendre_nodes(n));
    cache
        .lock()
        .expect("quadrature cache poisoned")
        .insert(n, Arc::clone(&table));
    table
}

fn legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            // Three-term recurrence for P_n(z) and its derivative.
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pm = if n <= 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let step = pn / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// A 1-D integration interval with its rule and order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
    pub rule: Rule,
}

impl QuadratureGrid {
    pub fn new(lower: f64, upper: f64, points: usize, rule: Rule) -> Result<Self> {
        let g = Self {
            lower,
            upper,
            points,
            rule,
        };
        g.validate()?;
        Ok(g)
    }

    /// `center ± half_width`.
    pub fn centered(center: f64, half_width: f64, points: usize, rule: Rule) -> Result<Self> {
        Self::new(center - half_width, center + half_width, points, rule)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite() && self.lower < self.upper) {
            return Err(Error::GridCoverage(format!(
                "invalid bounds [{}, {}]",
                self.lower, self.upper
            )));
        }
        if self.points < MIN_POINTS {
            return Err(Error::GridCoverage(format!(
                "{} points per dimension, need at least {MIN_POINTS}",
                self.points
            )));
        }
        Ok(())
    }

    /// Split at `at`, giving each piece the full order. `None` if `at` is
    /// not strictly inside.
    pub fn split(&self, at: f64) -> Option<(Self, Self)> {
        (at > self.lower && at < self.upper).then_some((
            Self { upper: at, ..*self },
            Self { lower: at, ..*self },
        ))
    }

    /// Abscissae and weights.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let (a, b, n) = (self.lower, self.upper, self.points);
        match self.rule {
            Rule::GaussLegendre => {
                let t = gauss_legendre(n);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                t.0.iter().zip(&t.1).map(|(x, w)| (mid + half * x, half * w)).collect()
            }
            Rule::Trapezoid => {
                let h = (b - a) / (n - 1) as f64;
                (0..n)
                    .map(|i| {
                        let w = if i == 0 || i == n - 1 { 0.5 * h } else { h };
                        (a + h * i as f64, w)
                    })
                    .collect()
            }
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes().into_iter().map(|(x, w)| w * f(x)).sum()
    }

    pub fn with_points(&self, points: usize) -> Self {
        Self { points, ..*self }
    }

    pub fn with_rule(&self, rule: Rule) -> Self {
        Self { rule, ..*self }
    }
}

/// Zeroth, first and central second moments of a non-negative integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }
}

pub fn moments(grid: &QuadratureGrid, f: impl Fn(f64) -> f64) -> Moments {
    let nodes = grid.nodes();
    let vals: Vec<f64> = nodes.iter().map(|&(x, w)| w * f(x)).collect();
    let mass: f64 = vals.iter().sum();
    if mass <= 0.0 || !mass.is_finite() {
        return Moments {
            mass,
            mean: f64::NAN,
            variance: f64::NAN,
        };
    }
    let mean = nodes.iter().zip(&vals).map(|(n, v)| n.0 * v).sum::<f64>() / mass;
    let variance = nodes.iter().zip(&vals).map(|(n, v)| (n.0 - mean).powi(2) * v).sum::<f64>() / mass;
    Moments { mass, mean, variance }
}

/// Both bounds must lie at least `min_sigmas` numerical standard
/// deviations from the numerical mean.
pub fn check_coverage(grid: &QuadratureGrid, m: &Moments, min_sigmas: f64, what: &str) -> Result<()> {
    let s = m.std();
    let below = (m.mean - grid.lower) / s;
    let above = (grid.upper - m.mean) / s;
    if !(below >= min_sigmas && above >= min_sigmas) {
        return Err(Error::GridCoverage(format!(
            "{what}: bounds reach {below:.2}σ below and {above:.2}σ above the mean, need {min_sigmas}σ"
        )));
    }
    Ok(())
}

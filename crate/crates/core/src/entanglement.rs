//! From edge-spread widths to EPR and MGVT verdicts.
//!
//! The far-field width `D_k` and near-field width `D_ρ` fix the correlation
//! spreads
//!
//! ```text
//! σ+ = f_c·λS / (√2·π·D_k)        σ− = √2·λS·D_ρ / (M_S·(λI + λS))
//! ```
//!
//! and both the conditional-variance product and the MGVT product reduce to
//! `π²·D_k²·D_ρ² / (f_c²·λS²·M_S²)`. Entanglement is certified when that
//! product is strictly below 1/4 (EPR) or strictly below 1 (MGVT).

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{OpticalConfig, TwinPhotonModel};

pub const EPR_THRESHOLD: f64 = 0.25;
pub const MGVT_THRESHOLD: f64 = 1.0;
/// Relative disagreement with a reference product beyond which the report
/// raises `reference_mismatch`.
pub const REFERENCE_REL_TOL: f64 = 0.05;
pub const REPORT_SCHEMA: &str = "icfs.entanglement/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Space {
    Momentum,
    Position,
}

/// A fitted edge-spread width with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthMeasurement {
    /// `D` [m].
    pub width: f64,
    /// One-sigma uncertainty of `D` [m].
    pub sigma: f64,
    pub space: Space,
}

impl WidthMeasurement {
    pub fn new(width: f64, sigma: f64, space: Space) -> Result<Self> {
        let m = Self { width, sigma, space };
        m.validate()?;
        Ok(m)
    }

    pub fn momentum(width: f64, sigma: f64) -> Result<Self> {
        Self::new(width, sigma, Space::Momentum)
    }

    pub fn position(width: f64, sigma: f64) -> Result<Self> {
        Self::new(width, sigma, Space::Position)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width.is_finite() && self.width > 0.0) {
            return Err(Error::InvalidWidth(format!("width must be > 0, got {}", self.width)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidWidth(format!("uncertainty must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }

    pub fn relative_sigma(&self) -> f64 {
        self.sigma / self.width
    }

    fn expect(&self, space: Space) -> Result<()> {
        self.validate()?;
        if self.space != space {
            return Err(Error::InvalidWidth(format!(
                "expected a {space:?} width, got a {:?} width",
                self.space
            )));
        }
        Ok(())
    }
}

/// A value with its one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
}

impl Estimate {
    pub fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    /// Whether the two one-sigma intervals overlap.
    pub fn overlaps(&self, other: &Estimate) -> bool {
        (self.value - other.value).abs() <= self.sigma + other.sigma
    }
}

/// `σ+ = f_c·λS/(√2·π·D_k)` with first-order uncertainty.
pub fn sigma_plus_from_dk(d_k: &WidthMeasurement, cfg: &OpticalConfig) -> Result<Estimate> {
    d_k.expect(Space::Momentum)?;
    cfg.validate()?;
    let value = cfg.focal_length * cfg.lambda_signal / (2f64.sqrt() * PI * d_k.width);
    Ok(Estimate::new(value, value * d_k.relative_sigma()))
}

/// `σ− = √2·λS·D_ρ/(M_S·(λI+λS))` with first-order uncertainty.
pub fn sigma_minus_from_drho(d_rho: &WidthMeasurement, cfg: &OpticalConfig) -> Result<Estimate> {
    d_rho.expect(Space::Position)?;
    cfg.validate()?;
    let value = 2f64.sqrt() * cfg.lambda_signal * d_rho.width
        / (cfg.signal_magnification * (cfg.lambda_idler + cfg.lambda_signal));
    Ok(Estimate::new(value, value * d_rho.relative_sigma()))
}

/// Far-field width produced by a given `σ+` (inverse of [`sigma_plus_from_dk`]).
pub fn dk_from_sigma_plus(sigma_plus: f64, cfg: &OpticalConfig) -> f64 {
    cfg.focal_length * cfg.lambda_signal / (2f64.sqrt() * PI * sigma_plus)
}

/// Near-field width produced by a given `σ−` (inverse of [`sigma_minus_from_drho`]).
pub fn drho_from_sigma_minus(sigma_minus: f64, cfg: &OpticalConfig) -> f64 {
    sigma_minus * cfg.signal_magnification * (cfg.lambda_idler + cfg.lambda_signal) / (2f64.sqrt() * cfg.lambda_signal)
}

/// Widths `(D_k, D_ρ)` predicted by the configuration.
pub fn theory_widths(cfg: &OpticalConfig) -> Result<(f64, f64)> {
    let model = TwinPhotonModel::new(cfg)?;
    Ok((
        dk_from_sigma_plus(model.widths.sigma_plus, cfg),
        drho_from_sigma_minus(model.widths.sigma_minus, cfg),
    ))
}

/// First-order relative uncertainty of `D_k²·D_ρ²`.
pub fn propagate_uncertainty(d_k: &WidthMeasurement, d_rho: &WidthMeasurement) -> Result<f64> {
    d_k.validate()?;
    d_rho.validate()?;
    Ok(2.0 * d_k.relative_sigma().hypot(d_rho.relative_sigma()))
}

fn width_product(d_k: f64, d_rho: f64, cfg: &OpticalConfig) -> f64 {
    let denom = cfg.focal_length * cfg.lambda_signal * cfg.signal_magnification;
    PI * PI * (d_rho * d_k / denom).powi(2)
}

/// `Δ²(x_I|x_S)·Δ²(k_Ix|k_Sx)` from the two widths.
pub fn epr_product(d_k: &WidthMeasurement, d_rho: &WidthMeasurement, cfg: &OpticalConfig) -> Result<Estimate> {
    d_k.expect(Space::Momentum)?;
    d_rho.expect(Space::Position)?;
    cfg.validate()?;
    let value = width_product(d_k.width, d_rho.width, cfg);
    Ok(Estimate::new(value, value * propagate_uncertainty(d_k, d_rho)?))
}

/// `Δ²K_{x+}·Δ²X_−` from the two widths; numerically the same expression as
/// [`epr_product`].
pub fn mgvt_product(d_k: &WidthMeasurement, d_rho: &WidthMeasurement, cfg: &OpticalConfig) -> Result<Estimate> {
    epr_product(d_k, d_rho, cfg)
}

/// Monte-Carlo propagation: mean and standard deviation of the product
/// over Gaussian draws of both widths. Cross-check for the first-order rule.
pub fn monte_carlo_product(
    d_k: &WidthMeasurement,
    d_rho: &WidthMeasurement,
    cfg: &OpticalConfig,
    samples: usize,
    seed: u64,
) -> Result<Estimate> {
    d_k.expect(Space::Momentum)?;
    d_rho.expect(Space::Position)?;
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nk, nr) = (
        Normal::new(d_k.width, d_k.sigma).map_err(|e| Error::InvalidWidth(e.to_string()))?,
        Normal::new(d_rho.width, d_rho.sigma).map_err(|e| Error::InvalidWidth(e.to_string()))?,
    );
    let values: Vec<f64> = (0..samples)
        .map(|_| width_product(nk.sample(&mut rng), nr.sample(&mut rng), cfg))
        .collect();
    let n = values.len().max(2) as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate::new(mean, var.sqrt()))
}

/// EPR verdict: `product < 1/4`.
pub fn epr_violated(product: f64) -> bool {
    product < EPR_THRESHOLD
}

/// MGVT verdict: `product < 1`.
pub fn mgvt_violated(product: f64) -> bool {
    product < MGVT_THRESHOLD
}

/// Everything derived from one pair of width measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub schema: String,
    pub d_k: WidthMeasurement,
    pub d_rho: WidthMeasurement,
    #[serde(rename = "sigma_plus_m")]
    pub sigma_plus: Estimate,
    #[serde(rename = "sigma_minus_m")]
    pub sigma_minus: Estimate,
    pub epr_product: Estimate,
    pub mgvt_product: Estimate,
    pub epr_violated: bool,
    pub mgvt_violated: bool,
    /// `(1/4 − product)/σ`: distance below the EPR bound in propagated sigmas.
    pub epr_margin_sigma: f64,
    /// `(1 − product)/σ`.
    pub mgvt_margin_sigma: f64,
    /// Product predicted by the configuration alone.
    pub theory_product: f64,
    pub reference_product: Option<Estimate>,
    pub reference_overlap: Option<bool>,
    pub discrepancy_flags: Vec<String>,
}

fn margin(threshold: f64, product: &Estimate) -> f64 {
    let gap = threshold - product.value;
    if product.sigma > 0.0 {
        gap / product.sigma
    } else if gap == 0.0 {
        0.0
    } else {
        gap.signum() * f64::INFINITY
    }
}

/// Assemble the report. Verdicts use strict inequalities on the product
/// value alone; uncertainties only enter the margins.
pub fn build_report(
    d_k: &WidthMeasurement,
    d_rho: &WidthMeasurement,
    cfg: &OpticalConfig,
    reference: Option<Estimate>,
) -> Result<EntanglementReport> {
    let sigma_plus = sigma_plus_from_dk(d_k, cfg)?;
    let sigma_minus = sigma_minus_from_drho(d_rho, cfg)?;
    let epr = epr_product(d_k, d_rho, cfg)?;
    let mgvt = mgvt_product(d_k, d_rho, cfg)?;
    let theory_product = TwinPhotonModel::new(cfg)?.epr_product();

    let mut flags = Vec::new();
    let reference_overlap = reference.map(|r| {
        if (epr.value - r.value).abs() > REFERENCE_REL_TOL * r.value.abs() {
            flags.push("reference_mismatch".to_string());
        }
        epr.overlaps(&r)
    });
    if reference_overlap == Some(false) {
        flags.push("reference_outside_1sigma".to_string());
    }

    Ok(EntanglementReport {
        schema: REPORT_SCHEMA.to_string(),
        d_k: *d_k,
        d_rho: *d_rho,
        sigma_plus,
        sigma_minus,
        epr_product: epr,
        mgvt_product: mgvt,
        epr_violated: epr_violated(epr.value),
        mgvt_violated: mgvt_violated(mgvt.value),
        epr_margin_sigma: margin(EPR_THRESHOLD, &epr),
        mgvt_margin_sigma: margin(MGVT_THRESHOLD, &mgvt),
        theory_product,
        reference_product: reference,
        reference_overlap,
        discrepancy_flags: flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::VarianceForm;

    fn cfg() -> OpticalConfig {
        OpticalConfig::default()
    }

    fn dk(w: f64, s: f64) -> WidthMeasurement {
        WidthMeasurement::momentum(w, s).unwrap()
    }

    fn drho(w: f64, s: f64) -> WidthMeasurement {
        WidthMeasurement::position(w, s).unwrap()
    }

    #[test]
    fn sigma_plus_values() {
        let s = sigma_plus_from_dk(&dk(337.6e-6, 0.0), &cfg()).unwrap();
        assert!((s.value - 108.0e-6).abs() < 0.05e-6, "{}", s.value);
        let s = sigma_plus_from_dk(&dk(352e-6, 17e-6), &cfg()).unwrap();
        assert!((s.value - 103.6e-6).abs() < 0.05e-6, "{}", s.value);
        let half = sigma_plus_from_dk(&dk(704e-6, 0.0), &cfg()).unwrap();
        assert!((half.value * 2.0 - s.value).abs() < 1e-18);
    }

    #[test]
    fn sigma_minus_values() {
        let s = sigma_minus_from_drho(&drho(16.05e-6, 0.0), &cfg()).unwrap();
        assert!((s.value - 11.35e-6).abs() < 0.005e-6, "{}", s.value);
        let s = sigma_minus_from_drho(&drho(28e-6, 3e-6), &cfg()).unwrap();
        assert!((s.value - 19.80e-6).abs() < 0.005e-6);
        let m2 = OpticalConfig {
            signal_magnification: 2.0,
            ..cfg()
        };
        let h = sigma_minus_from_drho(&drho(28e-6, 3e-6), &m2).unwrap();
        assert!((h.value * 2.0 - s.value).abs() < 1e-18);
    }

    #[test]
    fn wrong_space_rejected() {
        assert!(sigma_plus_from_dk(&drho(1e-5, 0.0), &cfg()).is_err());
        assert!(epr_product(&drho(1e-5, 0.0), &dk(1e-4, 0.0), &cfg()).is_err());
        assert!(WidthMeasurement::momentum(0.0, 0.0).is_err());
        assert!(WidthMeasurement::momentum(1e-4, -1.0).is_err());
    }

    #[test]
    fn theory_widths_match_forward_model() {
        let (d_k, d_rho) = theory_widths(&cfg()).unwrap();
        assert!((d_k - 337.6e-6).abs() < 0.05e-6, "{d_k}");
        assert!((d_rho - 16.06e-6).abs() < 0.01e-6, "{d_rho}");
    }

    #[test]
    fn product_from_theory_widths() {
        let p = epr_product(&dk(337.6e-6, 0.0), &drho(16.05e-6, 0.0), &cfg()).unwrap();
        assert!((p.value - 0.01104).abs() < 0.00001, "{}", p.value);
        assert_eq!(p.sigma, 0.0);
    }

    #[test]
    fn product_from_reported_widths() {
        let p = epr_product(&dk(352e-6, 17e-6), &drho(28e-6, 3e-6), &cfg()).unwrap();
        assert!((p.value - 0.0365).abs() < 0.00005, "{}", p.value);
        assert!((p.sigma - 0.0086).abs() < 0.00005, "{}", p.sigma);
    }

    #[test]
    fn product_vanishes_with_position_width() {
        let p = epr_product(&dk(352e-6, 0.0), &drho(1e-12, 0.0), &cfg()).unwrap();
        assert!(p.value < 1e-14);
    }

    #[test]
    fn propagation_rule() {
        let rel = propagate_uncertainty(&dk(352e-6, 17e-6), &drho(28e-6, 3e-6)).unwrap();
        assert!((rel - 0.235).abs() < 0.0005, "{rel}");
        assert_eq!(propagate_uncertainty(&dk(352e-6, 0.0), &drho(28e-6, 0.0)).unwrap(), 0.0);
        let a = propagate_uncertainty(&dk(1.0, 0.1), &drho(1.0, 0.3)).unwrap();
        let b = propagate_uncertainty(&dk(1.0, 0.3), &drho(1.0, 0.1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_agrees_with_first_order() {
        let (a, b) = (dk(352e-6, 5e-6), drho(28e-6, 0.4e-6));
        let first = epr_product(&a, &b, &cfg()).unwrap();
        let mc = monte_carlo_product(&a, &b, &cfg(), 200_000, 11).unwrap();
        assert!((mc.value / first.value - 1.0).abs() < 0.01);
        assert!((mc.sigma / first.sigma - 1.0).abs() < 0.05);
    }

    #[test]
    fn round_trip_through_variances() {
        for (ratio, ms) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.7)] {
            let c = OpticalConfig {
                lambda_idler: ratio * 810e-9,
                signal_magnification: ms,
                ..cfg()
            };
            let model = TwinPhotonModel::new(&c).unwrap();
            let a = dk(dk_from_sigma_plus(model.widths.sigma_plus, &c), 0.0);
            let b = drho(drho_from_sigma_minus(model.widths.sigma_minus, &c), 0.0);
            let p = epr_product(&a, &b, &c).unwrap().value;
            let v = model.cond_var_position(VarianceForm::Approx) * model.cond_var_momentum(VarianceForm::Approx);
            assert!((p / v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn focal_length_scaling_invariance() {
        let c2 = OpticalConfig {
            focal_length: 0.6,
            ..cfg()
        };
        let p1 = epr_product(&dk(350e-6, 0.0), &drho(20e-6, 0.0), &cfg()).unwrap().value;
        let p2 = epr_product(&dk(1050e-6, 0.0), &drho(20e-6, 0.0), &c2).unwrap().value;
        assert!((p1 / p2 - 1.0).abs() < 1e-12);
    }

    fn widths_for_product(target: f64) -> (WidthMeasurement, WidthMeasurement) {
        // Fix D_k and solve for D_ρ.
        let c = cfg();
        let d_k = 337.6e-6;
        let d_rho = target.sqrt() * c.focal_length * c.lambda_signal * c.signal_magnification / (PI * d_k);
        (dk(d_k, 1e-6), drho(d_rho, 1e-7))
    }

    #[test]
    fn verdicts_follow_thresholds() {
        let (a, b) = (dk(337.6e-6, 0.0), drho(16.05e-6, 0.0));
        let r = build_report(&a, &b, &cfg(), None).unwrap();
        assert!(r.epr_violated && r.mgvt_violated);
        assert_eq!(r.epr_product, r.mgvt_product);

        let (a, b) = widths_for_product(0.5);
        let r = build_report(&a, &b, &cfg(), None).unwrap();
        assert!((r.epr_product.value - 0.5).abs() < 1e-12);
        assert!(!r.epr_violated && r.mgvt_violated);

        let (a, b) = widths_for_product(1.5);
        let r = build_report(&a, &b, &cfg(), None).unwrap();
        assert!(!r.epr_violated && !r.mgvt_violated);
    }

    #[test]
    fn threshold_is_strict() {
        assert!(!epr_violated(EPR_THRESHOLD));
        assert!(epr_violated(EPR_THRESHOLD - 1e-15));
        assert!(!mgvt_violated(MGVT_THRESHOLD));
        assert!(mgvt_violated(1.0 - f64::EPSILON));
        assert!(!epr_violated(f64::NAN));
    }

    #[test]
    fn verdicts_ignore_uncertainties() {
        let a = build_report(&dk(352e-6, 0.0), &drho(28e-6, 0.0), &cfg(), None).unwrap();
        let b = build_report(&dk(352e-6, 300e-6), &drho(28e-6, 25e-6), &cfg(), None).unwrap();
        assert_eq!((a.epr_violated, a.mgvt_violated), (b.epr_violated, b.mgvt_violated));
        assert!(b.epr_margin_sigma < a.epr_margin_sigma);
    }

    #[test]
    fn reference_flags() {
        let reference = Estimate::new(3.30e-2, 0.75e-2);
        let r = build_report(&dk(352e-6, 17e-6), &drho(28e-6, 3e-6), &cfg(), Some(reference)).unwrap();
        assert_eq!(r.reference_overlap, Some(true));
        assert!(r.discrepancy_flags.contains(&"reference_mismatch".to_string()));
        let r = build_report(&dk(352e-6, 17e-6), &drho(28e-6, 3e-6), &cfg(), None).unwrap();
        assert!(r.discrepancy_flags.is_empty());
        assert!(r.margin_ok());
    }

    impl EntanglementReport {
        fn margin_ok(&self) -> bool {
            self.epr_margin_sigma > 0.0 && self.mgvt_margin_sigma > self.epr_margin_sigma
        }
    }
}

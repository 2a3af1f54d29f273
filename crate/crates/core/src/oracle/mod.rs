//! Brute-force quadrature checks of the closed forms.
//!
//! Every quantity here is computed from the joint densities alone: the
//! conditional densities come from dividing by a numerically integrated
//! marginal, the MGVT variances from a 2-D integral over a sheared grid, and
//! the counting rates from integrating the transmitted fraction of the idler
//! distribution. Grids are placed adaptively: a wide scout pass locates the
//! mass, then the working grid spans `span_sigmas` numerical standard
//! deviations around the numerical mean and must cover at least
//! `min_coverage` of them on both sides.

use std::cell::RefCell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::physics::{DensityForm, KnifeEdge, MgvtVariances, OpticalConfig, TwinPhotonModel};

pub mod checks;
pub mod quadrature;

pub use checks::{run_checks, sweep_cases, CheckResult, SweepCase, CHECK_NAMES};
pub use quadrature::{check_coverage, moments, Moments, QuadratureGrid, Rule, MIN_POINTS};

/// Half-width of the scout pass, in guessed scales.
const SCOUT_SPAN: f64 = 40.0;
/// Masses below this are treated as empty tails.
const NEGLIGIBLE_MASS: f64 = 1e-280;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSettings {
    /// Half-width of the working grid in numerical standard deviations.
    pub span_sigmas: f64,
    pub points: usize,
    pub rule: Rule,
    /// Minimum distance from mean to either bound, in standard deviations.
    pub min_coverage: f64,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            span_sigmas: 8.0,
            points: 256,
            rule: Rule::GaussLegendre,
            min_coverage: 6.0,
        }
    }
}

impl OracleSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.span_sigmas.is_finite() && self.span_sigmas > 0.0) {
            return Err(Error::InvalidConfig(format!("oracle span must be > 0, got {}", self.span_sigmas)));
        }
        if self.points < MIN_POINTS {
            return Err(Error::InvalidConfig(format!(
                "oracle needs at least {MIN_POINTS} points, got {}",
                self.points
            )));
        }
        Ok(())
    }

    pub fn with_points(self, points: usize) -> Self {
        Self { points, ..self }
    }

    pub fn with_rule(self, rule: Rule) -> Self {
        Self { rule, ..self }
    }
}

/// Scout then refine. Returns `None` when the integrand carries no mass.
fn adaptive(
    f: impl Fn(f64) -> f64,
    center_guess: f64,
    scale_guess: f64,
    s: &OracleSettings,
    what: &str,
) -> Result<Option<(QuadratureGrid, Moments)>> {
    s.validate()?;
    let scout = QuadratureGrid::centered(center_guess, SCOUT_SPAN * scale_guess, 2 * s.points, s.rule)?;
    let m0 = moments(&scout, &f);
    if !(m0.mass > NEGLIGIBLE_MASS) {
        return Ok(None);
    }
    let grid = QuadratureGrid::centered(m0.mean, s.span_sigmas * m0.std(), s.points, s.rule)?;
    let m = moments(&grid, &f);
    check_coverage(&grid, &m, s.min_coverage, what)?;
    Ok(Some((grid, m)))
}

fn adaptive_required(
    f: impl Fn(f64) -> f64,
    center_guess: f64,
    scale_guess: f64,
    s: &OracleSettings,
    what: &str,
) -> Result<Moments> {
    adaptive(f, center_guess, scale_guess, s, what)?
        .map(|(_, m)| m)
        .ok_or_else(|| Error::GridCoverage(format!("{what}: integrand has no mass")))
}

fn momentum_scale(model: &TwinPhotonModel) -> f64 {
    1.0 / model.widths.sigma_plus
}

fn position_scale(model: &TwinPhotonModel) -> f64 {
    0.5 * (1.0 + model.ratio) * model.widths.sigma_minus
}

/// `Δ²(k_Ix | k_Sx)` from the full joint density by quadrature over `k_I`.
pub fn numeric_cond_var_momentum(cfg: &OpticalConfig, k_s: f64, s: &OracleSettings) -> Result<f64> {
    let model = TwinPhotonModel::new(cfg)?;
    let f = |k_i| model.joint_momentum_density_1d(k_s, k_i, DensityForm::Full);
    Ok(adaptive_required(f, -k_s, momentum_scale(&model), s, "conditional momentum")?.variance)
}

/// `Δ²(x_I | x_S)` from the full joint density by quadrature over `x_I`.
pub fn numeric_cond_var_position(cfg: &OpticalConfig, x_s: f64, s: &OracleSettings) -> Result<f64> {
    let model = TwinPhotonModel::new(cfg)?;
    let f = |x_i| model.joint_position_density_1d(x_s, x_i, DensityForm::Full);
    Ok(adaptive_required(f, x_s, position_scale(&model), s, "conditional position")?.variance)
}

/// Numerical `P(k_I | k_S)` as joint over quadrature marginal.
pub fn numeric_conditional_momentum(cfg: &OpticalConfig, k_i: f64, k_s: f64, s: &OracleSettings) -> Result<f64> {
    let model = TwinPhotonModel::new(cfg)?;
    let f = |k| model.joint_momentum_density_1d(k_s, k, DensityForm::Full);
    let m = adaptive_required(f, -k_s, momentum_scale(&model), s, "momentum marginal")?;
    Ok(f(k_i) / m.mass)
}

/// Numerical `P(x_I | x_S)` as joint over quadrature marginal.
pub fn numeric_conditional_position(cfg: &OpticalConfig, x_i: f64, x_s: f64, s: &OracleSettings) -> Result<f64> {
    let model = TwinPhotonModel::new(cfg)?;
    let f = |x| model.joint_position_density_1d(x_s, x, DensityForm::Full);
    let m = adaptive_required(f, x_s, position_scale(&model), s, "position marginal")?;
    Ok(f(x_i) / m.mass)
}

/// Moments of `u` under a 2-D density `g(u, v)`, integrating `v` on an
/// inner grid placed separately for each outer node.
fn sheared_moments(
    g: impl Fn(f64, f64) -> f64,
    outer_scale: f64,
    inner_scale: f64,
    s: &OracleSettings,
    what: &str,
) -> Result<Moments> {
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let marginal = |u: f64| -> f64 {
        if failure.borrow().is_some() {
            return 0.0;
        }
        match adaptive(|v| g(u, v), 0.0, inner_scale, s, what) {
            Ok(Some((_, m))) => m.mass,
            Ok(None) => 0.0,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                0.0
            }
        }
    };
    let m = adaptive(&marginal, 0.0, outer_scale, s, what);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    m?.map(|(_, m)| m)
        .ok_or_else(|| Error::GridCoverage(format!("{what}: integrand has no mass")))
}

/// Variances of `K_{x+} = k_S + k_I` and `X_− = x_S − x_I` by 2-D quadrature
/// of the full joint densities.
pub fn numeric_mgvt_variances(cfg: &OpticalConfig, s: &OracleSettings) -> Result<MgvtVariances> {
    let model = TwinPhotonModel::new(cfg)?;
    let (sp, sm) = (model.widths.sigma_plus, model.widths.sigma_minus);
    let k = sheared_moments(
        |sum, k_s| model.joint_momentum_density_1d(k_s, sum - k_s, DensityForm::Full),
        1.0 / sp,
        1.0 / sm,
        s,
        "K+ marginal",
    )?;
    let x = sheared_moments(
        |diff, x_s| model.joint_position_density_1d(x_s, x_s - diff, DensityForm::Full),
        position_scale(&model),
        0.5 * sp,
        s,
        "X- marginal",
    )?;
    Ok(MgvtVariances {
        k_plus: k.variance,
        x_minus: x.variance,
    })
}

/// Which density [`normalization_check`] integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdfKind {
    /// Full momentum density over both photons.
    FullMomentum,
    /// Full position density over both photons.
    FullPosition,
    /// Approximate momentum density over the idler at fixed signal.
    ApproxMomentum,
    /// Approximate position density over the idler at fixed signal.
    ApproxPosition,
}

/// `|∫pdf − 1|` for the 2-vector density; the transverse components
/// factorize so the 2-D mass is the square of the 1-D one.
pub fn normalization_check(cfg: &OpticalConfig, kind: PdfKind, s: &OracleSettings) -> Result<f64> {
    let model = TwinPhotonModel::new(cfg)?;
    let (sp, sm) = (model.widths.sigma_plus, model.widths.sigma_minus);
    let mass = match kind {
        PdfKind::FullMomentum => {
            sheared_moments(
                |sum, k_s| model.joint_momentum_density_1d(k_s, sum - k_s, DensityForm::Full),
                1.0 / sp,
                1.0 / sm,
                s,
                "momentum normalization",
            )?
            .mass
        }
        PdfKind::FullPosition => {
            sheared_moments(
                |diff, x_s| model.joint_position_density_1d(x_s, x_s - diff, DensityForm::Full),
                position_scale(&model),
                0.5 * sp,
                s,
                "position normalization",
            )?
            .mass
        }
        PdfKind::ApproxMomentum => {
            let k_s = 0.7 / sp;
            adaptive_required(
                |k_i| model.joint_momentum_density_1d(k_s, k_i, DensityForm::Approx),
                -k_s,
                momentum_scale(&model),
                s,
                "approx momentum normalization",
            )?
            .mass
        }
        PdfKind::ApproxPosition => {
            let x_s = 0.7 * sm;
            adaptive_required(
                |x_i| model.joint_position_density_1d(x_s, x_i, DensityForm::Approx),
                x_s,
                position_scale(&model),
                s,
                "approx position normalization",
            )?
            .mass
        }
    };
    Ok((mass * mass - 1.0).abs())
}

/// Transmitted fraction of a 1-D idler density on a fixed grid, split at the
/// edge so the step is never straddled.
fn transmitted_fraction(
    f: impl Fn(f64) -> f64,
    grid: &QuadratureGrid,
    edge_at: f64,
    transmission: impl Fn(f64) -> f64,
    s: &OracleSettings,
    what: &str,
) -> Result<f64> {
    let m = moments(grid, &f);
    check_coverage(grid, &m, s.min_coverage, what)?;
    let open = match grid.split(edge_at) {
        Some((lo, hi)) => lo.integrate(|x| f(x) * transmission(x)) + hi.integrate(|x| f(x) * transmission(x)),
        None => grid.integrate(|x| f(x) * transmission(x)),
    };
    Ok(open / m.mass)
}

/// Far-field rate by integrating the approximate momentum density over the
/// idler, with the object plane mapped by `ρ_o = λI·f_c·k_I/(2π)`.
/// `edge = None` removes the object.
pub fn numeric_counting_rate_ff(
    cfg: &OpticalConfig,
    edge: Option<&KnifeEdge>,
    x_c: f64,
    phi_in: f64,
    s: &OracleSettings,
) -> Result<f64> {
    s.validate()?;
    let model = TwinPhotonModel::new(cfg)?;
    let k_s = 2.0 * PI * x_c / (cfg.lambda_signal * cfg.focal_length);
    let f = |k_i| model.joint_momentum_density_1d(k_s, k_i, DensityForm::Approx);
    let grid = QuadratureGrid::centered(-k_s, s.span_sigmas * momentum_scale(&model), s.points, s.rule)?;
    let to_object = cfg.lambda_idler * cfg.focal_length / (2.0 * PI);
    let fraction = match edge {
        Some(e) => transmitted_fraction(
            f,
            &grid,
            e.position / to_object,
            |k_i| e.transmission(to_object * k_i),
            s,
            "far-field idler",
        )?,
        None => transmitted_fraction(f, &grid, f64::NAN, |_| 1.0, s, "far-field idler")?,
    };
    Ok(1.0 + cfg.far_field_transmission * fraction * phi_in.cos())
}

/// Near-field rate by integrating the approximate position density over the
/// idler, with `x_S = x_c/M_S` and `ρ_o = M_I·x_I`.
pub fn numeric_counting_rate_nf(
    cfg: &OpticalConfig,
    edge: Option<&KnifeEdge>,
    x_c: f64,
    phi_in: f64,
    s: &OracleSettings,
) -> Result<f64> {
    s.validate()?;
    let model = TwinPhotonModel::new(cfg)?;
    let x_s = x_c / cfg.signal_magnification;
    let f = |x_i| model.joint_position_density_1d(x_s, x_i, DensityForm::Approx);
    let grid = QuadratureGrid::centered(x_s, s.span_sigmas * position_scale(&model), s.points, s.rule)?;
    let m_i = cfg.idler_magnification;
    let fraction = match edge {
        Some(e) => transmitted_fraction(
            f,
            &grid,
            e.position / m_i,
            |x_i| e.transmission(m_i * x_i),
            s,
            "near-field idler",
        )?,
        None => transmitted_fraction(f, &grid, f64::NAN, |_| 1.0, s, "near-field idler")?,
    };
    Ok(1.0 + cfg.near_field_transmission * fraction * phi_in.cos())
}

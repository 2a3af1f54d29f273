//! Double-Gaussian model of the transverse correlations of SPDC photon pairs.
//!
//! The pair is described per transverse component by two widths: `σ+`, the
//! spread of the momentum-sum correlation (set by the pump waist), and `σ−`,
//! the spread of the position-difference correlation (set by the crystal
//! length and the wavelengths). With `r = λI/λS` the joint densities are
//!
//! ```text
//! P(kS, kI) = σ+σ−(1+r)/(2π) · exp[−σ+²(kI+kS)²/2] · exp[−σ−²(kS − r·kI)²/2]
//! P(xS, xI) = 2/(π σ+σ−(1+r)) · exp[−2(xI + r·xS)²/(σ+²(1+r)²)]
//!                              · exp[−2(xS − xI)²/(σ−²(1+r)²)]
//! ```
//!
//! and the 2-D transverse densities are products of the x and y factors. The
//! "approximate" forms drop the slowly varying factor and keep only the
//! tight correlation; they are normalised over the retained coordinate
//! (`kS + kI` in momentum, `xS − xI` in position), which makes each of them a
//! unit-mass density in the idler variable at fixed signal variable.
//!
//! All variances returned here are per transverse component; `x` is the
//! analysis axis because the knife edge only varies along `x`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Physical parameters of the source and the imaging optics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalConfig {
    /// Pump wavelength [m].
    pub lambda_pump: f64,
    /// Signal (detected photon) wavelength [m].
    pub lambda_signal: f64,
    /// Idler (undetected photon) wavelength [m].
    pub lambda_idler: f64,
    /// Crystal length [m].
    pub crystal_length: f64,
    /// Pump waist at the crystal [m].
    pub pump_waist: f64,
    /// Focal length of the far-field lenses [m].
    pub focal_length: f64,
    /// Magnification of the crystal-to-camera imaging in the signal arm.
    pub signal_magnification: f64,
    /// Magnification of the crystal-to-object imaging in the idler arm.
    pub idler_magnification: f64,
    /// Idler transmission/alignment factor in the far-field configuration.
    pub far_field_transmission: f64,
    /// Idler transmission/alignment factor in the near-field configuration.
    pub near_field_transmission: f64,
}

impl Default for OpticalConfig {
    /// Degenerate 405 nm → 810 nm + 810 nm source, 2 mm crystal, 108 µm pump
    /// waist, 200 mm lenses and unit near-field magnification.
    fn default() -> Self {
        Self {
            lambda_pump: 405e-9,
            lambda_signal: 810e-9,
            lambda_idler: 810e-9,
            crystal_length: 2e-3,
            pump_waist: 108e-6,
            focal_length: 0.2,
            signal_magnification: 1.0,
            idler_magnification: 1.0,
            far_field_transmission: 0.3,
            near_field_transmission: 0.07,
        }
    }
}

impl OpticalConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_pump", self.lambda_pump),
            ("lambda_signal", self.lambda_signal),
            ("lambda_idler", self.lambda_idler),
            ("crystal_length", self.crystal_length),
            ("pump_waist", self.pump_waist),
            ("focal_length", self.focal_length),
            ("signal_magnification", self.signal_magnification),
            ("idler_magnification", self.idler_magnification),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and > 0, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("far_field_transmission", self.far_field_transmission),
            ("near_field_transmission", self.near_field_transmission),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in [0, 1], got {value}"
                )));
            }
        }
        Ok(())
    }

    /// `λI / λS`.
    pub fn wavelength_ratio(&self) -> f64 {
        self.lambda_idler / self.lambda_signal
    }
}

/// Correlation widths of the double-Gaussian model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationWidths {
    /// Momentum-sum width `σ+` [m].
    pub sigma_plus: f64,
    /// Position-difference width `σ−` [m].
    pub sigma_minus: f64,
}

/// `σ+ = w_p` and `σ− = sqrt(L·λp·λS / (2π·λI))`.
pub fn derive_widths(cfg: &OpticalConfig) -> Result<CorrelationWidths> {
    cfg.validate()?;
    Ok(CorrelationWidths {
        sigma_plus: cfg.pump_waist,
        sigma_minus: (cfg.crystal_length * cfg.lambda_pump * cfg.lambda_signal
            / (2.0 * PI * cfg.lambda_idler))
            .sqrt(),
    })
}

/// Which density to evaluate: the full double Gaussian or the
/// single-Gaussian approximation keeping only the tight correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityForm {
    Full,
    Approx,
}

/// Exact conditional variance or its `σ−/σ+ → 0` approximation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarianceForm {
    Exact,
    Approx,
}

/// Variances entering the MGVT separability bound, per transverse component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgvtVariances {
    /// `Δ²K_{x+}` of `kIx + kSx` [1/m²].
    pub k_plus: f64,
    /// `Δ²X_−` of `xS − xI` [m²].
    pub x_minus: f64,
}

impl MgvtVariances {
    pub fn product(&self) -> f64 {
        self.k_plus * self.x_minus
    }
}

/// Twin-photon densities and variances for one validated configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwinPhotonModel {
    pub widths: CorrelationWidths,
    /// `λI / λS`.
    pub ratio: f64,
}

impl TwinPhotonModel {
    pub fn new(cfg: &OpticalConfig) -> Result<Self> {
        Ok(Self {
            widths: derive_widths(cfg)?,
            ratio: cfg.wavelength_ratio(),
        })
    }

    /// Build a model directly from widths and wavelength ratio.
    pub fn from_widths(widths: CorrelationWidths, ratio: f64) -> Self {
        Self { widths, ratio }
    }

    fn sp2(&self) -> f64 {
        self.widths.sigma_plus * self.widths.sigma_plus
    }

    fn sm2(&self) -> f64 {
        self.widths.sigma_minus * self.widths.sigma_minus
    }

    /// One transverse component of `P(kS, kI)` [m²].
    pub fn joint_momentum_density_1d(&self, k_s: f64, k_i: f64, form: DensityForm) -> f64 {
        let (sp, sm, r) = (self.widths.sigma_plus, self.widths.sigma_minus, self.ratio);
        let sum = k_i + k_s;
        let tight = (-0.5 * self.sp2() * sum * sum).exp();
        match form {
            DensityForm::Full => {
                let diff = k_s - r * k_i;
                sp * sm * (1.0 + r) / (2.0 * PI) * tight * (-0.5 * self.sm2() * diff * diff).exp()
            }
            DensityForm::Approx => sp / (2.0 * PI).sqrt() * tight,
        }
    }

    /// Transverse joint momentum density `P(kS, kI)` for 2-vectors.
    pub fn joint_momentum_pdf(&self, k_s: [f64; 2], k_i: [f64; 2], form: DensityForm) -> f64 {
        self.joint_momentum_density_1d(k_s[0], k_i[0], form)
            * self.joint_momentum_density_1d(k_s[1], k_i[1], form)
    }

    /// One transverse component of `P(xS, xI)` [1/m].
    pub fn joint_position_density_1d(&self, x_s: f64, x_i: f64, form: DensityForm) -> f64 {
        let (sp, sm, r) = (self.widths.sigma_plus, self.widths.sigma_minus, self.ratio);
        let q = (1.0 + r) * (1.0 + r);
        let diff = x_s - x_i;
        let tight = (-2.0 * diff * diff / (self.sm2() * q)).exp();
        match form {
            DensityForm::Full => {
                let sum = x_i + r * x_s;
                2.0 / (PI * sp * sm * (1.0 + r)) * (-2.0 * sum * sum / (self.sp2() * q)).exp() * tight
            }
            DensityForm::Approx => 2.0_f64.sqrt() / (PI.sqrt() * sm * (1.0 + r)) * tight,
        }
    }

    /// Transverse joint position density `P(ρS, ρI)` for 2-vectors.
    pub fn joint_position_pdf(&self, rho_s: [f64; 2], rho_i: [f64; 2], form: DensityForm) -> f64 {
        self.joint_position_density_1d(rho_s[0], rho_i[0], form)
            * self.joint_position_density_1d(rho_s[1], rho_i[1], form)
    }

    /// `σ+² + r²σ−²`, the precision of `kI` at fixed `kS`.
    fn momentum_precision(&self) -> f64 {
        self.sp2() + self.ratio * self.ratio * self.sm2()
    }

    /// `P(kI | kS)` for 2-vectors, in the completed-square form derived from
    /// the full joint density.
    pub fn conditional_momentum_pdf(&self, k_i: [f64; 2], k_s: [f64; 2]) -> f64 {
        let a = self.momentum_precision();
        let c = self.sp2() - self.ratio * self.sm2();
        let ks2 = k_s[0] * k_s[0] + k_s[1] * k_s[1];
        let ki2 = k_i[0] * k_i[0] + k_i[1] * k_i[1];
        let dot = k_i[0] * k_s[0] + k_i[1] * k_s[1];
        a / (2.0 * PI) * (-0.5 * c * c / a * ks2).exp() * (-0.5 * a * ki2).exp() * (-c * dot).exp()
    }

    /// One transverse component of `P(kI | kS)`.
    pub fn conditional_momentum_density_1d(&self, k_i: f64, k_s: f64) -> f64 {
        let a = self.momentum_precision();
        let c = self.sp2() - self.ratio * self.sm2();
        (a / (2.0 * PI)).sqrt()
            * (-0.5 * c * c / a * k_s * k_s).exp()
            * (-0.5 * a * k_i * k_i).exp()
            * (-c * k_i * k_s).exp()
    }

    fn position_terms(&self) -> (f64, f64, f64) {
        let (sp2, sm2, r) = (self.sp2(), self.sm2(), self.ratio);
        let q = (1.0 + r) * (1.0 + r);
        let quad = 2.0 / q * (1.0 / sp2 + 1.0 / sm2);
        let first = 2.0 / q * (sp2 - r * sm2).powi(2) / (sp2 * sm2 * (sp2 + sm2));
        let cross = 4.0 / q * (1.0 / sm2 - r / sp2);
        (first, quad, cross)
    }

    /// `P(ρI | ρS)` for 2-vectors.
    pub fn conditional_position_pdf(&self, rho_i: [f64; 2], rho_s: [f64; 2]) -> f64 {
        let (sp2, sm2, r) = (self.sp2(), self.sm2(), self.ratio);
        let (first, quad, cross) = self.position_terms();
        let rs2 = rho_s[0] * rho_s[0] + rho_s[1] * rho_s[1];
        let ri2 = rho_i[0] * rho_i[0] + rho_i[1] * rho_i[1];
        let dot = rho_i[0] * rho_s[0] + rho_i[1] * rho_s[1];
        2.0 / PI / ((1.0 + r) * (1.0 + r)) * (sp2 + sm2) / (sp2 * sm2)
            * (-first * rs2).exp()
            * (-quad * ri2).exp()
            * (cross * dot).exp()
    }

    /// One transverse component of `P(ρI | ρS)`.
    pub fn conditional_position_density_1d(&self, x_i: f64, x_s: f64) -> f64 {
        let (first, quad, cross) = self.position_terms();
        (quad / PI).sqrt() * (-first * x_s * x_s).exp() * (-quad * x_i * x_i).exp() * (cross * x_i * x_s).exp()
    }

    /// `Δ²(k_Ix | k_Sx)` [1/m²].
    pub fn cond_var_momentum(&self, form: VarianceForm) -> f64 {
        match form {
            VarianceForm::Exact => 1.0 / self.momentum_precision(),
            VarianceForm::Approx => 1.0 / self.sp2(),
        }
    }

    /// `Δ²(x_I | x_S)` [m²].
    pub fn cond_var_position(&self, form: VarianceForm) -> f64 {
        let half = 0.5 * (1.0 + self.ratio);
        let (sp2, sm2) = (self.sp2(), self.sm2());
        match form {
            VarianceForm::Exact => half * half * sp2 * sm2 / (sp2 + sm2),
            VarianceForm::Approx => half * half * sm2,
        }
    }

    /// Variances of `K_{x+} = kIx + kSx` and `X_− = xS − xI` under the full
    /// joint densities.
    pub fn mgvt_variances(&self) -> MgvtVariances {
        let half = 0.5 * (1.0 + self.ratio);
        MgvtVariances {
            k_plus: 1.0 / self.sp2(),
            x_minus: self.sm2() * half * half,
        }
    }

    /// Product of the approximate conditional variances,
    /// `[(1+r)/2]² σ−²/σ+²`.
    pub fn epr_product(&self) -> f64 {
        self.cond_var_position(VarianceForm::Approx) * self.cond_var_momentum(VarianceForm::Approx)
    }
}

/// Side of the edge that absorbs the idler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockedSide {
    /// `x_o < x0` is opaque.
    #[default]
    Below,
    /// `x_o > x0` is opaque.
    Above,
}

/// Absorptive knife edge along the `y_o` axis of the object plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KnifeEdge {
    /// Edge position `x0` on the object plane [m].
    pub position: f64,
    pub blocked: BlockedSide,
}

impl KnifeEdge {
    /// Binary amplitude transmission. The edge point itself transmits.
    pub fn transmission(&self, x_o: f64) -> f64 {
        let open = match self.blocked {
            BlockedSide::Below => x_o >= self.position,
            BlockedSide::Above => x_o <= self.position,
        };
        if open {
            1.0
        } else {
            0.0
        }
    }
}

//! Linear least-squares fit of `a + b·cos(φ − φ0)` to a phase series.
//!
//! The model is linear in the basis `{1, cos φ, sin φ}` with coefficients
//! `(a, b·cos φ0, b·sin φ0)`, so no iteration is needed. The normal matrix
//! depends only on the phases and is factored once per scan.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::sim::MIN_PHASES;

/// Smallest eigenvalue ratio of the normalised normal matrix accepted as
/// well determined.
const CONDITION_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    /// Offset `a` [counts].
    pub offset: f64,
    /// Amplitude `b ≥ 0` [counts].
    pub amplitude: f64,
    /// Phase `φ0` [rad] in `(−π, π]`.
    pub phase: f64,
    /// `b / a`; NaN when the offset is not positive.
    pub visibility: f64,
    /// Root-mean-square residual [counts].
    pub rms_residual: f64,
    pub valid: bool,
}

impl SinusoidFit {
    fn invalid() -> Self {
        Self {
            offset: f64::NAN,
            amplitude: f64::NAN,
            phase: f64::NAN,
            visibility: f64::NAN,
            rms_residual: f64::NAN,
            valid: false,
        }
    }

    /// Visibility above one cannot come from a physical fringe and marks a
    /// pathological pixel. The value is reported unclamped.
    pub fn is_overmodulated(&self) -> bool {
        self.visibility > 1.0
    }
}

/// Pre-factored fitter for one fixed set of phases.
#[derive(Debug, Clone)]
pub struct SinusoidFitter {
    cos: Vec<f64>,
    sin: Vec<f64>,
    inverse: Option<Matrix3<f64>>,
}

impl SinusoidFitter {
    pub fn new(phases: &[f64]) -> Result<Self> {
        if phases.len() < MIN_PHASES {
            return Err(Error::TooFewSamples {
                got: phases.len(),
                min: MIN_PHASES,
            });
        }
        let cos: Vec<f64> = phases.iter().map(|p| p.cos()).collect();
        let sin: Vec<f64> = phases.iter().map(|p| p.sin()).collect();
        let mut normal = Matrix3::zeros();
        for (&c, &s) in cos.iter().zip(&sin) {
            let row = Vector3::new(1.0, c, s);
            normal += row * row.transpose();
        }
        let eig = SymmetricEigen::new(normal / phases.len() as f64).eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        let inverse = if lo > CONDITION_FLOOR * hi {
            normal.try_inverse()
        } else {
            None
        };
        Ok(Self { cos, sin, inverse })
    }

    pub fn is_determined(&self) -> bool {
        self.inverse.is_some()
    }

    pub fn len(&self) -> usize {
        self.cos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cos.is_empty()
    }

    pub fn fit(&self, counts: &[f64]) -> Result<SinusoidFit> {
        if counts.len() != self.cos.len() {
            return Err(Error::LengthMismatch {
                phases: self.cos.len(),
                counts: counts.len(),
            });
        }
        Ok(self.fit_unchecked(counts))
    }

    pub(crate) fn fit_unchecked(&self, counts: &[f64]) -> SinusoidFit {
        let Some(inverse) = self.inverse else {
            return SinusoidFit::invalid();
        };
        let mut rhs = Vector3::zeros();
        for ((&y, &c), &s) in counts.iter().zip(&self.cos).zip(&self.sin) {
            rhs += Vector3::new(y, y * c, y * s);
        }
        let coef = inverse * rhs;
        let (a, c1, c2) = (coef[0], coef[1], coef[2]);
        let ssr: f64 = counts
            .iter()
            .zip(&self.cos)
            .zip(&self.sin)
            .map(|((&y, &c), &s)| {
                let r = y - (a + c1 * c + c2 * s);
                r * r
            })
            .sum();
        let amplitude = c1.hypot(c2);
        let valid = a > 0.0 && a.is_finite();
        SinusoidFit {
            offset: a,
            amplitude,
            phase: c2.atan2(c1),
            visibility: if a > 0.0 { amplitude / a } else { f64::NAN },
            rms_residual: (ssr / counts.len() as f64).sqrt(),
            valid,
        }
    }
}

/// Fit `a + b·cos(φ − φ0)` to `counts` sampled at `phases`.
pub fn fit_sinusoid(phases: &[f64], counts: &[f64]) -> Result<SinusoidFit> {
    if phases.len() != counts.len() {
        return Err(Error::LengthMismatch {
            phases: phases.len(),
            counts: counts.len(),
        });
    }
    SinusoidFitter::new(phases)?.fit(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::PhaseScan;
    use std::f64::consts::PI;

    #[test]
    fn constant_signal() {
        let scan = PhaseScan::uniform(360, 1.0);
        let fit = fit_sinusoid(&scan.phases, &vec![100.0; 360]).unwrap();
        assert!((fit.offset - 100.0).abs() < 1e-12);
        assert!(fit.amplitude < 1e-12);
        assert!(fit.visibility < 1e-14);
        assert!(fit.valid);
    }

    #[test]
    fn exact_recovery_on_model() {
        let scan = PhaseScan::uniform(360, 1.0);
        let counts: Vec<f64> = scan.phases.iter().map(|p| 200.0 * (1.0 + 0.3 * (p - 1.0).cos())).collect();
        let fit = fit_sinusoid(&scan.phases, &counts).unwrap();
        assert!((fit.visibility - 0.3).abs() < 1e-12);
        assert!((fit.phase - 1.0).abs() < 1e-12);
        assert!((fit.offset - 200.0).abs() < 1e-10);
        assert!(fit.rms_residual < 1e-10);
    }

    #[test]
    fn too_few_samples() {
        let phases = [0.0, 1.0, 2.0];
        assert!(matches!(
            fit_sinusoid(&phases, &[1.0, 2.0, 3.0]),
            Err(Error::TooFewSamples { got: 3, .. })
        ));
    }

    #[test]
    fn congruent_phases_are_underdetermined() {
        let phases: Vec<f64> = (0..10).map(|i| 0.4 + (i % 2) as f64 * PI).collect();
        let counts = vec![5.0; 10];
        let fit = fit_sinusoid(&phases, &counts).unwrap();
        assert!(!fit.valid);
    }

    #[test]
    fn overmodulation_flagged_not_clamped() {
        let scan = PhaseScan::uniform(16, 1.0);
        let counts: Vec<f64> = scan.phases.iter().map(|p| 10.0 * (1.0 + 1.5 * p.cos())).collect();
        let fit = fit_sinusoid(&scan.phases, &counts).unwrap();
        assert!(fit.is_overmodulated());
        assert!((fit.visibility - 1.5).abs() < 1e-12);
    }

    #[test]
    fn length_mismatch() {
        let scan = PhaseScan::uniform(12, 1.0);
        assert!(fit_sinusoid(&scan.phases, &[1.0; 11]).is_err());
    }
}

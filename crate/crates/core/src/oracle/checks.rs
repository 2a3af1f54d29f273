//! The named oracle checks and the parameter sweep they run over.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{
    numeric_cond_var_momentum, numeric_cond_var_position, numeric_conditional_momentum, numeric_conditional_position,
    numeric_counting_rate_ff, numeric_counting_rate_nf, numeric_mgvt_variances, normalization_check, OracleSettings,
    PdfKind, Rule,
};
use crate::entanglement::{dk_from_sigma_plus, drho_from_sigma_minus};
use crate::error::{Error, Result};
use crate::physics::{BlockedSide, KnifeEdge, OpticalConfig, TwinPhotonModel, VarianceForm};
use crate::sim::{counting_rate_ff, counting_rate_nf, far_field_edge_image, near_field_edge_image};

pub const CHECK_NAMES: [&str; 10] = [
    "cond_var_momentum",
    "cond_var_position",
    "mgvt",
    "rate_ff",
    "rate_nf",
    "normalization",
    "conditional_pdf",
    "approx_gap",
    "convergence",
    "rule_agreement",
];

const WAVELENGTH_RATIOS: [f64; 3] = [1.0, 0.5, 2.0];
const WIDTH_RATIOS: [f64; 3] = [0.01, 0.1, 0.3];
const RATE_POINTS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCase {
    pub label: String,
    pub cfg: OpticalConfig,
}

/// The supplied configuration followed by the 3×3 sweep over `λI/λS` and
/// `σ−/σ+`. Pump waist, pump and signal wavelengths are kept; the idler
/// wavelength and crystal length are set to reach each grid point.
pub fn sweep_cases(base: &OpticalConfig) -> Vec<SweepCase> {
    let mut cases = vec![SweepCase {
        label: "config".to_string(),
        cfg: *base,
    }];
    for r in WAVELENGTH_RATIOS {
        for q in WIDTH_RATIOS {
            let lambda_idler = r * base.lambda_signal;
            let sigma_minus = q * base.pump_waist;
            let crystal_length =
                sigma_minus * sigma_minus * 2.0 * PI * lambda_idler / (base.lambda_pump * base.lambda_signal);
            cases.push(SweepCase {
                label: format!("r={r},q={q}"),
                cfg: OpticalConfig {
                    lambda_idler,
                    crystal_length,
                    ..*base
                },
            });
        }
    }
    cases
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub case: String,
    pub quantity: String,
    pub oracle: f64,
    pub reference: f64,
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Set when the oracle itself could not run (e.g. grid coverage).
    pub failure: Option<String>,
}

struct Ctx<'a> {
    case: &'a SweepCase,
    settings: &'a OracleSettings,
    tol_override: Option<f64>,
    out: Vec<CheckResult>,
}

impl Ctx<'_> {
    fn push(&mut self, check: &str, quantity: &str, oracle: Result<f64>, reference: f64, relative: bool, tol: f64) {
        let tolerance = self.tol_override.unwrap_or(tol);
        let (oracle, error, failure) = match oracle {
            Ok(v) => {
                let e = if relative {
                    (v / reference - 1.0).abs()
                } else {
                    (v - reference).abs()
                };
                (v, e, None)
            }
            Err(e) => (f64::NAN, f64::NAN, Some(e.to_string())),
        };
        self.out.push(CheckResult {
            check: check.to_string(),
            case: self.case.label.clone(),
            quantity: quantity.to_string(),
            oracle,
            reference,
            error,
            tolerance,
            passed: failure.is_none() && error <= tolerance,
            failure,
        });
    }
}

/// Run one named check, or `"all"`, over the sweep anchored at `base`.
pub fn run_checks(
    base: &OpticalConfig,
    selector: &str,
    settings: &OracleSettings,
    tol_override: Option<f64>,
) -> Result<Vec<CheckResult>> {
    base.validate()?;
    settings.validate()?;
    let selected: Vec<&str> = if selector == "all" {
        CHECK_NAMES.to_vec()
    } else if let Some(name) = CHECK_NAMES.iter().find(|n| **n == selector) {
        vec![*name]
    } else {
        return Err(Error::InvalidConfig(format!(
            "unknown oracle check '{selector}', expected 'all' or one of {}",
            CHECK_NAMES.join(", ")
        )));
    };
    let mut results = Vec::new();
    for case in sweep_cases(base) {
        let mut ctx = Ctx {
            case: &case,
            settings,
            tol_override,
            out: Vec::new(),
        };
        for name in &selected {
            run_one(&mut ctx, name)?;
        }
        results.extend(ctx.out);
    }
    Ok(results)
}

fn run_one(ctx: &mut Ctx<'_>, name: &str) -> Result<()> {
    let cfg = ctx.case.cfg;
    let s = *ctx.settings;
    let model = TwinPhotonModel::new(&cfg)?;
    let (sp, sm) = (model.widths.sigma_plus, model.widths.sigma_minus);
    let var_k = model.cond_var_momentum(VarianceForm::Exact);
    let var_x = model.cond_var_position(VarianceForm::Exact);
    match name {
        "cond_var_momentum" => {
            for (label, k_s) in [("k_s=0", 0.0), ("k_s=1.5/σ+", 1.5 / sp)] {
                ctx.push(name, label, numeric_cond_var_momentum(&cfg, k_s, &s), var_k, true, 1e-6);
            }
        }
        "cond_var_position" => {
            for (label, x_s) in [("x_s=0", 0.0), ("x_s=2σ−", 2.0 * sm)] {
                ctx.push(name, label, numeric_cond_var_position(&cfg, x_s, &s), var_x, true, 1e-6);
            }
        }
        "mgvt" => {
            let closed = model.mgvt_variances();
            let numeric = numeric_mgvt_variances(&cfg, &s);
            let (k, x) = match numeric {
                Ok(v) => (Ok(v.k_plus), Ok(v.x_minus)),
                Err(e) => (Err(Error::GridCoverage(e.to_string())), Err(e)),
            };
            ctx.push(name, "var K+", k, closed.k_plus, true, 1e-6);
            ctx.push(name, "var X-", x, closed.x_minus, true, 1e-6);
        }
        "rate_ff" | "rate_nf" => rate_check(ctx, name, &model)?,
        "normalization" => {
            for (label, kind) in [
                ("full momentum", PdfKind::FullMomentum),
                ("full position", PdfKind::FullPosition),
                ("approx momentum", PdfKind::ApproxMomentum),
                ("approx position", PdfKind::ApproxPosition),
            ] {
                ctx.push(name, label, normalization_check(&cfg, kind, &s), 0.0, false, 1e-6);
            }
        }
        "conditional_pdf" => {
            let mut worst_k: Result<f64> = Ok(0.0);
            let mut worst_x: Result<f64> = Ok(0.0);
            for a in [-2.0, -1.0, 0.0, 0.5, 1.5] {
                for b in [-1.5, -0.5, 0.0, 1.0, 2.0] {
                    let (k_i, k_s) = (a / sp, b / sp);
                    let closed = model.conditional_momentum_density_1d(k_i, k_s);
                    worst_k = worst_rel(worst_k, numeric_conditional_momentum(&cfg, k_i, k_s, &s), closed);
                    let scale = 0.5 * (1.0 + model.ratio) * sm;
                    let (x_s, x_i) = (b * sm, b * sm + a * scale);
                    let closed = model.conditional_position_density_1d(x_i, x_s);
                    worst_x = worst_rel(worst_x, numeric_conditional_position(&cfg, x_i, x_s, &s), closed);
                }
            }
            ctx.push(name, "momentum, 25 points", worst_k, 0.0, false, 1e-8);
            ctx.push(name, "position, 25 points", worst_x, 0.0, false, 1e-8);
        }
        "approx_gap" => {
            // Relative gaps between oracle exact variances and the
            // approximations, within a factor of 2 of their leading-order size.
            let r = model.ratio;
            let bound_k = (r * sm / sp).powi(2);
            let gap_k = numeric_cond_var_momentum(&cfg, 0.0, &s).map(|v| {
                let approx = model.cond_var_momentum(VarianceForm::Approx);
                ((approx - v).abs() / approx / bound_k).log2()
            });
            ctx.push(name, "log2 momentum gap / (rσ−/σ+)²", gap_k, 0.0, false, 1.0);
            let bound_x = (sm / sp).powi(2);
            let gap_x = numeric_cond_var_position(&cfg, 0.0, &s).map(|v| {
                let approx = model.cond_var_position(VarianceForm::Approx);
                ((approx - v).abs() / approx / bound_x).log2()
            });
            ctx.push(name, "log2 position gap / (σ−/σ+)²", gap_x, 0.0, false, 1.0);
        }
        "convergence" => {
            let fine = s.with_points(2 * s.points);
            let pairs = [
                ("cond var momentum", numeric_cond_var_momentum(&cfg, 0.0, &s), numeric_cond_var_momentum(&cfg, 0.0, &fine)),
                ("cond var position", numeric_cond_var_position(&cfg, 0.0, &s), numeric_cond_var_position(&cfg, 0.0, &fine)),
            ];
            for (label, a, b) in pairs {
                match b {
                    Ok(b) => ctx.push(name, label, a, b, true, 1e-9),
                    Err(e) => ctx.push(name, label, Err(e), f64::NAN, true, 1e-9),
                }
            }
        }
        "rule_agreement" => {
            let other = match s.rule {
                Rule::GaussLegendre => s.with_rule(Rule::Trapezoid),
                Rule::Trapezoid => s.with_rule(Rule::GaussLegendre),
            };
            let pairs = [
                ("cond var momentum", numeric_cond_var_momentum(&cfg, 0.0, &s), numeric_cond_var_momentum(&cfg, 0.0, &other)),
                ("cond var position", numeric_cond_var_position(&cfg, 0.0, &s), numeric_cond_var_position(&cfg, 0.0, &other)),
            ];
            for (label, a, b) in pairs {
                match b {
                    Ok(b) => ctx.push(name, label, a, b, true, 1e-9),
                    Err(e) => ctx.push(name, label, Err(e), f64::NAN, true, 1e-9),
                }
            }
        }
        other => return Err(Error::InvalidConfig(format!("unknown oracle check '{other}'"))),
    }
    Ok(())
}

fn worst_rel(acc: Result<f64>, numeric: Result<f64>, closed: f64) -> Result<f64> {
    let acc = acc?;
    let v = numeric?;
    Ok(acc.max((v / closed - 1.0).abs()))
}

/// Maximum absolute rate error over deterministic pseudo-random
/// `(x_c, φ)` points within three widths of the edge image, alternating
/// the blocked side.
fn rate_check(ctx: &mut Ctx<'_>, name: &str, model: &TwinPhotonModel) -> Result<()> {
    let cfg = ctx.case.cfg;
    let s = *ctx.settings;
    let far = name == "rate_ff";
    let width = if far {
        dk_from_sigma_plus(model.widths.sigma_plus, &cfg)
    } else {
        drho_from_sigma_minus(model.widths.sigma_minus, &cfg)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(if far { 0xff } else { 0x4e });
    let mut worst: Result<f64> = Ok(0.0);
    for i in 0..RATE_POINTS {
        let blocked = if i % 2 == 0 { BlockedSide::Below } else { BlockedSide::Above };
        let edge = KnifeEdge {
            position: rng.random_range(-0.5..0.5) * width,
            blocked,
        };
        let phi = rng.random_range(0.0..2.0 * PI);
        let t: f64 = rng.random_range(-3.0..3.0);
        let (numeric, closed) = if far {
            let x_c = far_field_edge_image(&cfg, &edge) + t * width;
            (
                numeric_counting_rate_ff(&cfg, Some(&edge), x_c, phi, &s),
                counting_rate_ff(&cfg, &edge, x_c, phi),
            )
        } else {
            let x_c = near_field_edge_image(&cfg, &edge) + t * width;
            (
                numeric_counting_rate_nf(&cfg, Some(&edge), x_c, phi, &s),
                counting_rate_nf(&cfg, &edge, x_c, phi),
            )
        };
        worst = match (worst, numeric) {
            (Ok(w), Ok(v)) => Ok(w.max((v - closed).abs())),
            (Err(e), _) | (_, Err(e)) => Err(e),
        };
    }
    ctx.push(name, "max |rate error|, 20 points", worst, 0.0, false, 1e-6);
    Ok(())
}

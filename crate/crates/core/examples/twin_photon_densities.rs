//! Correlation widths, conditional variances and the EPR/MGVT products
//! predicted for the default source, plus a look at how they change with
//! crystal length.

use induced_coherence::physics::{DensityForm, OpticalConfig, TwinPhotonModel, VarianceForm};

fn main() -> induced_coherence::Result<()> {
    let cfg = OpticalConfig::default();
    let model = TwinPhotonModel::new(&cfg)?;
    let (sp, sm) = (model.widths.sigma_plus, model.widths.sigma_minus);
    println!("sigma+ = {:.3} µm, sigma- = {:.3} µm, r = {}", sp * 1e6, sm * 1e6, model.ratio);

    for form in [VarianceForm::Exact, VarianceForm::Approx] {
        let vk = model.cond_var_momentum(form);
        let vx = model.cond_var_position(form);
        println!("{form:?}: Δ²(k|k) = {vk:.4e} m⁻², Δ²(x|x) = {vx:.4e} m², product = {:.5}", vk * vx);
    }
    let mgvt = model.mgvt_variances();
    println!("MGVT: var K+ = {:.4e}, var X- = {:.4e}, product = {:.5}", mgvt.k_plus, mgvt.x_minus, mgvt.product());

    println!("\nconditional idler momentum density at k_S = 1/σ+:");
    let k_s = 1.0 / sp;
    for i in -4..=4 {
        let k_i = -k_s + i as f64 * 0.5 / sp;
        let joint = model.joint_momentum_density_1d(k_s, k_i, DensityForm::Full);
        println!(
            "  k_I = {:+9.1} m⁻¹  P(kS,kI) = {:.4e}  P(kI|kS) = {:.4e}",
            k_i,
            joint,
            model.conditional_momentum_density_1d(k_i, k_s)
        );
    }

    println!("\nEPR product against crystal length:");
    for length_mm in [0.5, 1.0, 2.0, 5.0, 10.0] {
        let m = TwinPhotonModel::new(&OpticalConfig {
            crystal_length: length_mm * 1e-3,
            ..cfg
        })?;
        println!("  L = {length_mm:4.1} mm  sigma- = {:6.2} µm  product = {:.5}", m.widths.sigma_minus * 1e6, m.epr_product());
    }
    Ok(())
}

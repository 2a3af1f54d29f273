//! Fit the error-function edge model to a noiseless far-field profile and
//! to a noisy one, comparing band averaging strategies.

use induced_coherence::entanglement::theory_widths;
use induced_coherence::fit::{
    analyze_map_with, build_visibility_map, rise_width_24_76, BandAverage, VisibilityMap, DEFAULT_BAND_ROWS,
    DEFAULT_OFFSET_FLOOR,
};
use induced_coherence::io::RunConfig;
use induced_coherence::sim::{expected_stack, simulate_stack, Mode};

fn main() -> induced_coherence::Result<()> {
    let cfg = RunConfig::default();
    let (d_k, _) = theory_widths(&cfg.optics)?;
    let mode = Mode::FarField;
    let camera = cfg.camera(mode);
    let scan = cfg.phase_scan();

    let exact = expected_stack(&cfg.scene(mode), &camera, &scan)?;
    let map = VisibilityMap::from_samples(&camera, &scan.phases, &exact, DEFAULT_OFFSET_FLOOR)?;
    let a = analyze_map_with(&map, DEFAULT_BAND_ROWS, None, None, BandAverage::Phasor)?;
    println!(
        "noiseless: D = {:.6} µm (optics predict {:.6} µm), x0 = {:.2e} m, V_max = {:.6}, {} iterations",
        a.fit.width * 1e6,
        d_k * 1e6,
        a.fit.x0,
        a.fit.v_max,
        a.fit.iterations
    );

    let stack = simulate_stack(&cfg.scene(mode), &camera, &scan, 11)?;
    let map = build_visibility_map(&stack)?;
    for average in [BandAverage::Phasor, BandAverage::Magnitude] {
        let a = analyze_map_with(&map, DEFAULT_BAND_ROWS, None, None, average)?;
        println!(
            "noisy, {average:?}: D = {:.2} ± {:.2} µm, 24-76 % rise {:.2} µm, sign {}",
            a.fit.width * 1e6,
            a.fit.width_sigma() * 1e6,
            rise_width_24_76(&a.fit) * 1e6,
            a.fit.sign.as_str()
        );
    }
    Ok(())
}

//! Simulate both configurations with default settings, recover the edge
//! widths from the noisy stacks and compare with the widths the optics
//! predict.

use std::time::Instant;

use induced_coherence::entanglement::theory_widths;
use induced_coherence::fit::{analyze_map, build_visibility_map, rise_width_24_76, DEFAULT_BAND_ROWS};
use induced_coherence::io::RunConfig;
use induced_coherence::sim::{simulate_stack, Mode};

fn main() -> induced_coherence::Result<()> {
    let cfg = RunConfig::default();
    let (d_k, d_rho) = theory_widths(&cfg.optics)?;
    for (mode, expected) in [(Mode::FarField, d_k), (Mode::NearField, d_rho)] {
        let start = Instant::now();
        let stack = simulate_stack(&cfg.scene(mode), &cfg.camera(mode), &cfg.phase_scan(), 1)?;
        let map = build_visibility_map(&stack)?;
        let analysis = analyze_map(&map, DEFAULT_BAND_ROWS, None, None)?;
        let fit = &analysis.fit;
        println!(
            "{}: D = {:.3} ± {:.3} µm (expected {:.3} µm, {:+.2} %), 24-76 % rise {:.3} µm, V_max {:.4}, {:.2} s",
            mode.as_str(),
            fit.width * 1e6,
            fit.width_sigma() * 1e6,
            expected * 1e6,
            100.0 * (fit.width / expected - 1.0),
            rise_width_24_76(fit) * 1e6,
            fit.v_max,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}

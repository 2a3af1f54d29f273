//! Build a near-field visibility map from a simulated stack and print a
//! coarse text rendering of it.

use induced_coherence::fit::build_visibility_map;
use induced_coherence::io::RunConfig;
use induced_coherence::sim::{simulate_stack, Mode};

fn main() -> induced_coherence::Result<()> {
    let mut cfg = RunConfig::default();
    cfg.camera.width = 64;
    cfg.camera.height = 16;
    let mode = Mode::NearField;
    let stack = simulate_stack(&cfg.scene(mode), &cfg.camera(mode), &cfg.phase_scan(), 3)?;
    let map = build_visibility_map(&stack)?;
    println!("{} of {} pixels valid", map.valid_count(), map.fits.len());

    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    let vmax = cfg.optics.near_field_transmission;
    for row in 0..map.height {
        let line: String = (0..map.width)
            .map(|col| {
                let v = map.get(row, col).visibility / vmax;
                shades[((v * 9.0).round().clamp(0.0, 9.0)) as usize]
            })
            .collect();
        println!("|{line}|");
    }
    let mid = map.height / 2;
    for col in (0..map.width).step_by(8) {
        let f = map.get(mid, col);
        println!(
            "x = {:+7.1} µm  offset {:7.2}  amplitude {:6.3}  V {:.4}",
            map.column_position(col) * 1e6,
            f.offset,
            f.amplitude,
            f.visibility
        );
    }
    Ok(())
}

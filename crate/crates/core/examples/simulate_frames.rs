//! Simulate a small far-field stack and print how one pixel on each side of
//! the knife edge responds to the phase scan.

use induced_coherence::physics::OpticalConfig;
use induced_coherence::sim::{simulate_stack, CameraSpec, Mode, PhaseScan, SceneSpec};

fn main() -> induced_coherence::Result<()> {
    let scene = SceneSpec::new(Mode::FarField, OpticalConfig::default());
    let camera = CameraSpec::centered(32, 50e-6, 500.0);
    let scan = PhaseScan::uniform(24, 1.0);
    let stack = simulate_stack(&scene, &camera, &scan, 7)?;

    println!("{} frames of {}x{}", stack.n_frames(), camera.width, camera.height);
    let (blocked, open) = (2, 29);
    println!(
        "columns at x = {:+.0} µm (V = {:.3}) and x = {:+.0} µm (V = {:.3})",
        camera.coordinate(blocked) * 1e6,
        scene.visibility(camera.coordinate(blocked)),
        camera.coordinate(open) * 1e6,
        scene.visibility(camera.coordinate(open))
    );
    let a = stack.pixel_series(16, blocked);
    let b = stack.pixel_series(16, open);
    for (i, phi) in scan.phases.iter().enumerate() {
        println!("  φ = {phi:5.3}  {:5}  {:5}", a[i], b[i]);
    }
    Ok(())
}

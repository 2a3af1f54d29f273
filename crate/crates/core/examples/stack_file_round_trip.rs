//! Write a simulated stack to the ICFS container, read it back, and run the
//! file-based visibility and edge commands on it.

use induced_coherence::cli::{cmd_esf, cmd_simulate, cmd_visibility, DEFAULT_ROWS};
use induced_coherence::io::{read_stack, RunConfig};
use induced_coherence::sim::{simulate_stack, Mode};

fn main() -> induced_coherence::Result<()> {
    let dir = std::env::temp_dir().join(format!("icfs-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| induced_coherence::Error::Io { path: dir.clone(), source: e })?;
    let cfg = RunConfig::default();
    let mode = Mode::FarField;
    let path = dir.join("ff.icfs");

    let summary = cmd_simulate(&cfg, mode, 42, &path)?;
    let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
    println!("{} frames, {} bytes, {} saturated counts", summary.frames, bytes, summary.saturated);

    let (back, meta) = read_stack(&path)?;
    let direct = simulate_stack(&cfg.scene(mode), &cfg.camera(mode), &cfg.phase_scan(), 42)?;
    println!("round trip identical to direct simulation: {}", back == direct);
    println!("metadata mode {}, seed {}", meta.mode.as_str(), back.seed);

    let csv = dir.join("ff.csv");
    let map = cmd_visibility(&path, &csv)?;
    let report = cmd_esf(&csv, DEFAULT_ROWS, &dir.join("ff.json"))?;
    println!("{} valid pixels, D = {:.2} µm", map.valid_count(), report.d_m * 1e6);
    let _ = std::fs::remove_dir_all(&dir);
    Ok(())
}

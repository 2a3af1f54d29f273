//! Command implementations behind the `icfs` binary.
//!
//! Each command reads and writes files only through [`crate::io`], so the
//! same pipeline can be driven from tests without spawning a process.

use std::fmt::Write as _;
use std::path::Path;

use crate::entanglement::{build_report, EntanglementReport};
use crate::error::{Error, Result};
use crate::fit::{analyze_map, VisibilityMap, DEFAULT_OFFSET_FLOOR};
use crate::io::{
    read_json, read_raw_stack, read_visibility, write_entanglement_report, write_json, write_stack, write_visibility,
    EsfReport, RunConfig, StackMeta,
};
use crate::io::stack::meta_path;
use crate::oracle::{run_checks, CheckResult};
use crate::sim::{simulate_stack, Mode};

pub use crate::fit::DEFAULT_BAND_ROWS as DEFAULT_ROWS;

/// Defaults when no file is given.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimulateSummary {
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub saturated: u64,
}

/// Simulate a stack and write it with its metadata.
pub fn cmd_simulate(config: &RunConfig, mode: Mode, seed: u64, out: &Path) -> Result<SimulateSummary> {
    let camera = config.camera(mode);
    let stack = simulate_stack(&config.scene(mode), &camera, &config.phase_scan(), seed)?;
    let saturated = write_stack(out, &stack, config)?;
    Ok(SimulateSummary {
        frames: stack.n_frames(),
        width: camera.width,
        height: camera.height,
        saturated,
    })
}

/// Fit every pixel of a stack file and write the visibility CSV.
pub fn cmd_visibility(input: &Path, out: &Path) -> Result<VisibilityMap> {
    let raw = read_raw_stack(input)?;
    let mp = meta_path(input);
    let text = std::fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
    let meta = StackMeta::parse(&text, &mp.display().to_string())?;
    let mode = meta.mode;
    let stack = crate::io::stack::assemble(raw, &meta);
    let samples: Vec<f64> = stack.frames.iter().map(|&c| c as f64).collect();
    let map = VisibilityMap::from_samples(&stack.camera, &stack.scan.phases, &samples, DEFAULT_OFFSET_FLOOR)?;
    write_visibility(out, &map, mode)?;
    Ok(map)
}

/// Average `rows` rows of a visibility CSV around the brightest band and
/// fit the edge.
pub fn cmd_esf(input: &Path, rows: usize, out: &Path) -> Result<EsfReport> {
    let (map, meta) = read_visibility(input)?;
    let analysis = analyze_map(&map, rows, None, None)?;
    let report = EsfReport::new(&analysis, meta.mode);
    write_json(out, &report)?;
    Ok(report)
}

/// Combine a far-field and a near-field edge report into the entanglement
/// verdicts. Writes JSON to `out` when given.
pub fn cmd_verify(ff: &Path, nf: &Path, config: &RunConfig, out: Option<&Path>) -> Result<EntanglementReport> {
    let ff: EsfReport = read_json(ff)?;
    let nf: EsfReport = read_json(nf)?;
    if ff.mode()? != Mode::FarField {
        return Err(Error::InvalidWidth(format!("first report is `{}`, expected ff", ff.mode)));
    }
    if nf.mode()? != Mode::NearField {
        return Err(Error::InvalidWidth(format!("second report is `{}`, expected nf", nf.mode)));
    }
    let report = build_report(
        &ff.width_measurement()?,
        &nf.width_measurement()?,
        &config.optics,
        config.report.reference,
    )?;
    if let Some(out) = out {
        write_entanglement_report(out, &report)?;
    }
    Ok(report)
}

/// Run the oracle checks with the configuration's grid settings.
pub fn cmd_oracle(config: &RunConfig, check: &str, tol: Option<f64>) -> Result<Vec<CheckResult>> {
    run_checks(&config.optics, check, &config.oracle, tol)
}

pub fn render_oracle_table(results: &[CheckResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<18} {:<14} {:<32} {:>11} {:>9}  result",
        "check", "case", "quantity", "error", "tol"
    );
    for r in results {
        let status = match (&r.failure, r.passed) {
            (Some(f), _) => format!("FAIL ({f})"),
            (None, true) => "pass".to_string(),
            (None, false) => "FAIL".to_string(),
        };
        let _ = writeln!(
            out,
            "{:<18} {:<14} {:<32} {:>11.3e} {:>9.1e}  {status}",
            r.check, r.case, r.quantity, r.error, r.tolerance
        );
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let _ = writeln!(out, "{} checks, {failed} failed", results.len());
    out
}

pub fn render_verify_summary(report: &EntanglementReport) -> String {
    let mut out = String::new();
    let e = &report.epr_product;
    let _ = writeln!(out, "sigma_plus   = {:.4e} ± {:.2e} m", report.sigma_plus.value, report.sigma_plus.sigma);
    let _ = writeln!(out, "sigma_minus  = {:.4e} ± {:.2e} m", report.sigma_minus.value, report.sigma_minus.sigma);
    let _ = writeln!(out, "product      = {:.4e} ± {:.2e} (theory {:.4e})", e.value, e.sigma, report.theory_product);
    let _ = writeln!(
        out,
        "EPR  (< 1/4): {}  margin {:.1} σ",
        if report.epr_violated { "violated" } else { "not violated" },
        report.epr_margin_sigma
    );
    let _ = writeln!(
        out,
        "MGVT (< 1)  : {}  margin {:.1} σ",
        if report.mgvt_violated { "violated" } else { "not violated" },
        report.mgvt_margin_sigma
    );
    if !report.discrepancy_flags.is_empty() {
        let _ = writeln!(out, "flags        : {}", report.discrepancy_flags.join(", "));
    }
    out
}

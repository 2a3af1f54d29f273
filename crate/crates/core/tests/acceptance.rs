//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines are always printed. Exits
//! non-zero if any criterion fails, except those listed in
//! `KNOWN_UNATTAINABLE`, which are still printed as FAIL together with the
//! reason.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use induced_coherence::cli::{cmd_esf, cmd_simulate, cmd_verify, cmd_visibility, DEFAULT_ROWS};
use induced_coherence::entanglement::{build_report, Estimate, WidthMeasurement};
use induced_coherence::fit::{
    analyze_map, build_visibility_map, erf_eval, erf_inv, fit_esf, fit_sinusoid, rise_width_24_76, EdgeAnalysis,
    EsfProfile, EsfSign, VisibilityMap, DEFAULT_OFFSET_FLOOR,
};
use induced_coherence::io::{decode_stack, encode_stack, read_stack, RunConfig};
use induced_coherence::oracle::run_checks;
use induced_coherence::sim::{expected_stack, simulate_stack, Mode};

const SEED: u64 = 1;

const KNOWN_UNATTAINABLE: &[(&str, &str)] = &[(
    "7c",
    "2·erfinv(0.52) = 0.998863 (bisection), so the 24-76 % rise cannot equal 0.9901·D; \
     the rise width is checked against the bisection value in 7b",
)];

struct Line {
    id: &'static str,
    pass: bool,
    text: String,
}

fn line(id: &'static str, pass: bool, text: String) -> Line {
    Line { id, pass, text }
}

fn recover(cfg: &RunConfig, mode: Mode, seed: u64) -> (EdgeAnalysis, Duration) {
    let start = Instant::now();
    let stack = simulate_stack(&cfg.scene(mode), &cfg.camera(mode), &cfg.phase_scan(), seed).expect("simulate");
    let map = build_visibility_map(&stack).expect("visibility map");
    let a = analyze_map(&map, DEFAULT_ROWS, None, None).expect("edge fit");
    (a, start.elapsed())
}

fn recover_noiseless(cfg: &RunConfig, mode: Mode) -> EdgeAnalysis {
    let camera = cfg.camera(mode);
    let scan = cfg.phase_scan();
    let samples = expected_stack(&cfg.scene(mode), &camera, &scan).expect("expected stack");
    let map = VisibilityMap::from_samples(&camera, &scan.phases, &samples, DEFAULT_OFFSET_FLOOR).expect("map");
    analyze_map(&map, DEFAULT_ROWS, None, None).expect("edge fit")
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn main() -> ExitCode {
    let mut lines = Vec::new();
    let cfg = RunConfig::default();

    // 1. Far-field width.
    let (ff, ff_time) = recover(&cfg, Mode::FarField, SEED);
    let d_k = ff.fit.width;
    lines.push(line(
        "1",
        rel(d_k, 337.6e-6) <= 0.05 && ff_time < Duration::from_secs(60),
        format!(
            "far-field D_k = {:.2} µm vs 337.6 µm ({:+.2} %, tol 5 %), {}x{} pipeline {:.2} s (limit 60 s)",
            d_k * 1e6,
            100.0 * (d_k / 337.6e-6 - 1.0),
            cfg.camera.width,
            cfg.camera.height,
            ff_time.as_secs_f64()
        ),
    ));

    // 2. Near-field width.
    let (nf, _) = recover(&cfg, Mode::NearField, SEED);
    let d_rho = nf.fit.width;
    lines.push(line(
        "2",
        rel(d_rho, 16.05e-6) <= 0.08,
        format!(
            "near-field D_rho = {:.3} µm vs 16.05 µm ({:+.2} %, tol 8 %) at F_nf = {}",
            d_rho * 1e6,
            100.0 * (d_rho / 16.05e-6 - 1.0),
            cfg.optics.near_field_transmission
        ),
    ));

    // 3. Verdicts from the recovered widths.
    let wk = WidthMeasurement::momentum(d_k, ff.fit.width_sigma()).expect("width");
    let wr = WidthMeasurement::position(d_rho, nf.fit.width_sigma()).expect("width");
    let report = build_report(&wk, &wr, &cfg.optics, cfg.report.reference).expect("report");
    let p = report.epr_product.value;
    lines.push(line(
        "3",
        rel(p, 0.011) <= 0.15 && report.epr_violated && report.mgvt_violated && p < 0.25 && report.mgvt_product.value < 1.0,
        format!(
            "product {:.5} ± {:.5} vs 0.011 ({:+.1} %, tol 15 %); EPR violated {}, MGVT violated {}",
            p,
            report.epr_product.sigma,
            100.0 * (p / 0.011 - 1.0),
            report.epr_violated,
            report.mgvt_violated
        ),
    ));

    // 4. Independence from the transmission factor.
    let fs = [1.0, 0.3, 0.07];
    let mut noiseless_spread: f64 = 0.0;
    let mut noisy_ok = true;
    let mut worst_pull: f64 = 0.0;
    for mode in [Mode::FarField, Mode::NearField] {
        let mut clean = Vec::new();
        let mut noisy = Vec::new();
        for f in fs {
            let mut c = cfg.clone();
            c.optics.far_field_transmission = f;
            c.optics.near_field_transmission = f;
            clean.push(recover_noiseless(&c, mode).fit.width);
            let (a, _) = recover(&c, mode, SEED + 10);
            noisy.push((a.fit.width, a.fit.width_sigma()));
        }
        for w in &clean {
            noiseless_spread = noiseless_spread.max(rel(*w, clean[0]));
        }
        for i in 0..noisy.len() {
            for j in i + 1..noisy.len() {
                let (a, b) = (noisy[i], noisy[j]);
                let pull = (a.0 - b.0).abs() / a.1.hypot(b.1);
                worst_pull = worst_pull.max(pull);
                noisy_ok &= pull <= 3.0;
            }
        }
    }
    lines.push(line(
        "4",
        noiseless_spread <= 1e-8 && noisy_ok,
        format!(
            "F in {{1, 0.3, 0.07}}: noiseless width spread {noiseless_spread:.2e} (tol 1e-8), noisy worst separation {worst_pull:.2} σ (tol 3 σ)"
        ),
    ));

    // 5. The published widths.
    let published = build_report(
        &WidthMeasurement::momentum(352e-6, 17e-6).expect("width"),
        &WidthMeasurement::position(28e-6, 3e-6).expect("width"),
        &cfg.optics,
        Some(Estimate::new(3.30e-2, 0.75e-2)),
    )
    .expect("report");
    let e = published.epr_product;
    lines.push(line(
        "5",
        (e.value - 3.65e-2).abs() <= 0.005e-2
            && (e.sigma - 0.86e-2).abs() <= 0.005e-2
            && published.reference_overlap == Some(true)
            && published.discrepancy_flags.iter().any(|f| f == "reference_mismatch"),
        format!(
            "352 ± 17 µm, 28 ± 3 µm -> {:.4e} ± {:.4e}; overlaps (3.30 ± 0.75)e-2: {:?}; flags {:?}",
            e.value, e.sigma, published.reference_overlap, published.discrepancy_flags
        ),
    ));

    // 6. Oracle sweep.
    let start = Instant::now();
    let checks = run_checks(&cfg.optics, "all", &cfg.oracle, None).expect("oracle");
    let elapsed = start.elapsed();
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}/{}/{}", c.check, c.case, c.quantity))
        .collect();
    let cases: std::collections::BTreeSet<&str> = checks.iter().map(|c| c.case.as_str()).collect();
    lines.push(line(
        "6",
        failed.is_empty() && cases.len() == 10 && elapsed < Duration::from_secs(120),
        format!(
            "{} oracle comparisons over {} cases ({} sweep points), {} failed {:?}, {:.2} s (limit 120 s)",
            checks.len(),
            cases.len(),
            cases.len() - 1,
            failed.len(),
            failed,
            elapsed.as_secs_f64()
        ),
    ));

    // 7a. Noiseless fits recover their generating parameters.
    let phases: Vec<f64> = (0..360).map(|i| 2.0 * PI * i as f64 / 360.0).collect();
    let counts: Vec<f64> = phases.iter().map(|p| 200.0 * (1.0 + 0.3 * (p - 1.0).cos())).collect();
    let s = fit_sinusoid(&phases, &counts).expect("sinusoid");
    let sin_err = rel(s.offset, 200.0).max(rel(s.visibility, 0.3)).max(rel(s.phase, 1.0));
    let (v, x0, d) = (0.07, 3.1e-6, 16.05e-6);
    let x: Vec<f64> = (0..128).map(|i| (i as f64 - 63.5) * 2e-6).collect();
    let profile = EsfProfile {
        mean: x.iter().map(|&x| 0.5 * v * (1.0 + erf_eval((x - x0) / d))).collect(),
        std: vec![0.0; x.len()],
        x,
        rows_averaged: 1,
    };
    let fit = fit_esf(&profile, EsfSign::Rising).expect("esf");
    let esf_err = rel(fit.v_max, v).max(rel(fit.x0, x0)).max(rel(fit.width, d));
    lines.push(line(
        "7a",
        sin_err <= 1e-9 && esf_err <= 1e-9,
        format!("noiseless sinusoid max rel error {sin_err:.2e}, ESF {esf_err:.2e} (tol 1e-9)"),
    ));

    // 7b. Rise width against an independent bisection for erfinv(0.52).
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if libm_free_erf(mid) < 0.52 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let unit = {
        let mut f = fit;
        f.width = 1.0;
        rise_width_24_76(&f)
    };
    lines.push(line(
        "7b",
        rel(unit, 2.0 * lo) <= 1e-4 && rel(2.0 * erf_inv(0.52), 2.0 * lo) <= 1e-12,
        format!("rise width / D = {unit:.6}, bisection 2·erfinv(0.52) = {:.6} (tol 1e-4)", 2.0 * lo),
    ));

    // 7c. The literal constant.
    lines.push(line(
        "7c",
        rel(unit, 0.9901) <= 1e-4,
        format!("rise width / D = {unit:.6} vs literal 0.9901 ({:.2e} rel, tol 1e-4)", rel(unit, 0.9901)),
    ));

    // 8. Determinism, round trip and CLI equivalence.
    lines.push(criterion_8(&cfg, &report));

    let mut unexpected = 0;
    println!();
    for l in &lines {
        let known = KNOWN_UNATTAINABLE.iter().find(|(id, _)| *id == l.id);
        let tag = if l.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {}", l.id, l.text);
        if !l.pass {
            match known {
                Some((_, why)) => println!("       documented as unattainable: {why}"),
                None => unexpected += 1,
            }
        }
    }
    println!();
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} acceptance criteria failed");
        ExitCode::FAILURE
    }
}

/// Composite Simpson integration of the erf integrand; independent of the
/// erf implementation under test.
fn libm_free_erf(x: f64) -> f64 {
    let n = 20_000;
    let h = x / n as f64;
    let f = |t: f64| (-t * t).exp();
    let mut s = f(0.0) + f(x);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    2.0 / PI.sqrt() * s * h / 3.0
}

fn criterion_8(cfg: &RunConfig, library: &induced_coherence::entanglement::EntanglementReport) -> Line {
    let dir = tempfile::tempdir().expect("tempdir");
    let p = |name: &str| dir.path().join(name);

    let mut identical = true;
    for mode in [Mode::FarField, Mode::NearField] {
        let a = p(&format!("{}-a.icfs", mode.as_str()));
        let b = p(&format!("{}-b.icfs", mode.as_str()));
        cmd_simulate(cfg, mode, SEED, &a).expect("simulate");
        cmd_simulate(cfg, mode, SEED, &b).expect("simulate");
        identical &= std::fs::read(&a).expect("read") == std::fs::read(&b).expect("read");
    }

    let stack = simulate_stack(&cfg.scene(Mode::NearField), &cfg.camera(Mode::NearField), &cfg.phase_scan(), 99)
        .expect("simulate");
    let (bytes, _) = encode_stack(&stack);
    let raw = decode_stack(&bytes).expect("decode");
    let (file_stack, _) = read_stack(p("nf-a.icfs")).expect("read stack");
    let direct = simulate_stack(&cfg.scene(Mode::NearField), &cfg.camera(Mode::NearField), &cfg.phase_scan(), SEED)
        .expect("simulate");
    let round_trip = raw.counts.iter().map(|&c| c as u32).eq(stack.frames.iter().copied())
        && raw.phases == stack.scan.phases
        && file_stack == direct;

    let mut reports = Vec::new();
    for mode in [Mode::FarField, Mode::NearField] {
        let tag = mode.as_str();
        let csv = p(&format!("{tag}.csv"));
        let json = p(&format!("{tag}.json"));
        cmd_visibility(&p(&format!("{tag}-a.icfs")), &csv).expect("visibility");
        cmd_esf(&csv, DEFAULT_ROWS, &json).expect("esf");
        reports.push(json);
    }
    let cli = cmd_verify(&reports[0], &reports[1], cfg, Some(&p("verdict.json"))).expect("verify");
    let pairs = [
        (cli.d_k.width, library.d_k.width),
        (cli.d_k.sigma, library.d_k.sigma),
        (cli.d_rho.width, library.d_rho.width),
        (cli.d_rho.sigma, library.d_rho.sigma),
        (cli.sigma_plus.value, library.sigma_plus.value),
        (cli.sigma_minus.value, library.sigma_minus.value),
        (cli.epr_product.value, library.epr_product.value),
        (cli.epr_product.sigma, library.epr_product.sigma),
        (cli.mgvt_product.value, library.mgvt_product.value),
    ];
    let worst = pairs.iter().map(|&(a, b)| rel(a, b)).fold(0.0f64, f64::max);
    let same_verdicts = cli.epr_violated == library.epr_violated
        && cli.mgvt_violated == library.mgvt_violated
        && cli.discrepancy_flags == library.discrepancy_flags;

    line(
        "8",
        identical && round_trip && worst <= 1e-12 && same_verdicts,
        format!(
            "same-seed files byte-identical: {identical}; round trip identity: {round_trip}; CLI vs library max rel diff {worst:.1e} (tol 1e-12), verdicts equal: {same_verdicts}"
        ),
    )
}

//! Closed-form single-photon counting rates and synthetic camera stacks.
//!
//! Rates are normalised so that the rate without induced coherence is 1:
//!
//! ```text
//! far field : R = 1 + V_ff(x_c)·cos φ_in,  V_ff = F_ff/2 · (1 − erf(√2·π·σ+·(x_c − x_e)/(f_c·λS)))
//! near field: R = 1 + V_nf(x_c)·cos φ_in,  V_nf = F_nf/2 · (1 + erf(√2·λS·(x_c − x_e)/(M_S·(λI+λS)·σ−)))
//! ```
//!
//! where `x_e` is the image of the knife edge on the camera. The erf sign
//! flips when the edge blocks the other half plane.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fit::special::erf_eval;
use crate::physics::{derive_widths, BlockedSide, KnifeEdge, OpticalConfig};

/// Fewest phases that keep the per-pixel sinusoid fit well determined.
pub const MIN_PHASES: usize = 8;

/// Which plane of the crystal the object and the camera sit in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Fourier plane: probes momentum correlations.
    FarField,
    /// Image plane: probes position correlations.
    NearField,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::FarField => "ff",
            Mode::NearField => "nf",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ff" | "far_field" => Ok(Mode::FarField),
            "nf" | "near_field" => Ok(Mode::NearField),
            other => Err(format!("unknown mode `{other}` (expected ff or nf)")),
        }
    }
}

/// Camera geometry and noise model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraSpec {
    pub width: usize,
    pub height: usize,
    /// Pixel pitch on the camera plane [m].
    pub pixel_pitch: f64,
    /// Camera-plane coordinate of the centre of pixel (0, 0), used for both
    /// axes [m].
    pub origin_offset: f64,
    /// Expected counts per frame at unit normalised rate.
    pub mean_counts: f64,
    /// Standard deviation of Gaussian read noise [counts].
    pub readout_sigma: f64,
    /// Mean dark counts added to every pixel [counts].
    pub dark_rate: f64,
}

impl CameraSpec {
    /// Square sensor with the optical axis between the two central pixels.
    pub fn centered(size: usize, pixel_pitch: f64, mean_counts: f64) -> Self {
        Self {
            width: size,
            height: size,
            pixel_pitch,
            origin_offset: -0.5 * (size as f64 - 1.0) * pixel_pitch,
            mean_counts,
            readout_sigma: 0.0,
            dark_rate: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 8 || self.height < 8 {
            return Err(Error::InvalidCamera(format!(
                "sensor must be at least 8x8 pixels, got {}x{}",
                self.width, self.height
            )));
        }
        if !(self.pixel_pitch.is_finite() && self.pixel_pitch > 0.0) {
            return Err(Error::InvalidCamera(format!("pixel_pitch must be > 0, got {}", self.pixel_pitch)));
        }
        if !self.origin_offset.is_finite() {
            return Err(Error::InvalidCamera("origin_offset must be finite".into()));
        }
        // Zero mean counts is accepted so that an all-dark stack can be produced.
        if !(self.mean_counts.is_finite() && self.mean_counts >= 0.0) {
            return Err(Error::InvalidCamera(format!("mean_counts must be >= 0, got {}", self.mean_counts)));
        }
        if !(self.readout_sigma >= 0.0 && self.dark_rate >= 0.0) {
            return Err(Error::InvalidCamera("readout_sigma and dark_rate must be >= 0".into()));
        }
        Ok(())
    }

    /// Camera-plane coordinate of a pixel centre along either axis.
    pub fn coordinate(&self, index: usize) -> f64 {
        self.origin_offset + index as f64 * self.pixel_pitch
    }

    pub fn pixels(&self) -> usize {
        self.width * self.height
    }
}

/// Interferometric phases at which frames are recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScan {
    pub phases: Vec<f64>,
    /// Per-frame Gaussian jitter of the realised phase [rad].
    pub jitter_sigma: f64,
}

impl PhaseScan {
    /// `frames` phases spaced uniformly over `[0, 2π·cycles)`.
    pub fn uniform(frames: usize, cycles: f64) -> Self {
        let step = 2.0 * PI * cycles / frames as f64;
        Self {
            phases: (0..frames).map(|i| i as f64 * step).collect(),
            jitter_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.len() < MIN_PHASES {
            return Err(Error::ScanTooShort {
                got: self.phases.len(),
                min: MIN_PHASES,
            });
        }
        if !(self.jitter_sigma >= 0.0) {
            return Err(Error::InvalidConfig("jitter_sigma must be >= 0".into()));
        }
        Ok(())
    }
}

impl Default for PhaseScan {
    fn default() -> Self {
        Self::uniform(360, 1.0)
    }
}

/// Gaussian beam envelope multiplying the mean image, `exp(−2r²/w²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub center: [f64; 2],
    pub waist: f64,
}

impl Envelope {
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        (-2.0 * (dx * dx + dy * dy) / (self.waist * self.waist)).exp()
    }
}

/// Everything about the optical scene that shapes the mean image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneSpec {
    pub mode: Mode,
    pub optics: OpticalConfig,
    pub edge: KnifeEdge,
    pub envelope: Option<Envelope>,
}

impl SceneSpec {
    pub fn new(mode: Mode, optics: OpticalConfig) -> Self {
        Self {
            mode,
            optics,
            edge: KnifeEdge::default(),
            envelope: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.optics.validate()?;
        if let Some(env) = &self.envelope {
            if !(env.waist.is_finite() && env.waist > 0.0) {
                return Err(Error::InvalidConfig(format!("envelope waist must be > 0, got {}", env.waist)));
            }
        }
        Ok(())
    }

    /// Analytic fringe visibility at camera coordinate `x_c`.
    pub fn visibility(&self, x_c: f64) -> f64 {
        match self.mode {
            Mode::FarField => far_field_visibility(&self.optics, &self.edge, x_c),
            Mode::NearField => near_field_visibility(&self.optics, &self.edge, x_c),
        }
    }

    pub fn counting_rate(&self, x_c: f64, phi_in: f64) -> f64 {
        1.0 + self.visibility(x_c) * phi_in.cos()
    }
}

/// Phase-tagged stack of photon-count frames, stored frame-major then
/// row-major: `frames[(f·height + row)·width + col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameStack {
    pub camera: CameraSpec,
    pub scan: PhaseScan,
    pub frames: Vec<u32>,
    pub seed: u64,
    pub scene: SceneSpec,
}

impl FrameStack {
    pub fn n_frames(&self) -> usize {
        self.scan.phases.len()
    }

    pub fn frame(&self, index: usize) -> &[u32] {
        let n = self.camera.pixels();
        &self.frames[index * n..(index + 1) * n]
    }

    /// Counts of one pixel across all frames.
    pub fn pixel_series(&self, row: usize, col: usize) -> Vec<f64> {
        let n = self.camera.pixels();
        let offset = row * self.camera.width + col;
        (0..self.n_frames()).map(|f| self.frames[f * n + offset] as f64).collect()
    }
}

/// Camera-frame position of the knife-edge image in the far field.
///
/// The idler lens is taken to share the focal length `f_c` of the signal
/// lens, so `x_e = −(λS/λI)·x0`.
pub fn far_field_edge_image(cfg: &OpticalConfig, edge: &KnifeEdge) -> f64 {
    -cfg.lambda_signal / cfg.lambda_idler * edge.position
}

/// Camera-frame position of the knife-edge image in the near field,
/// `x_e = M_S·x0/M_I`.
pub fn near_field_edge_image(cfg: &OpticalConfig, edge: &KnifeEdge) -> f64 {
    cfg.signal_magnification * edge.position / cfg.idler_magnification
}

fn edge_sign(blocked: BlockedSide, mode: Mode) -> f64 {
    match (mode, blocked) {
        (Mode::FarField, BlockedSide::Below) | (Mode::NearField, BlockedSide::Above) => -1.0,
        (Mode::FarField, BlockedSide::Above) | (Mode::NearField, BlockedSide::Below) => 1.0,
    }
}

/// Far-field fringe visibility (edge-spread function).
pub fn far_field_visibility(cfg: &OpticalConfig, edge: &KnifeEdge, x_c: f64) -> f64 {
    let sigma_plus = cfg.pump_waist;
    let arg = 2f64.sqrt() * PI * sigma_plus * (x_c - far_field_edge_image(cfg, edge))
        / (cfg.focal_length * cfg.lambda_signal);
    0.5 * cfg.far_field_transmission * (1.0 + edge_sign(edge.blocked, Mode::FarField) * erf_eval(arg))
}

/// Near-field fringe visibility (edge-spread function).
pub fn near_field_visibility(cfg: &OpticalConfig, edge: &KnifeEdge, x_c: f64) -> f64 {
    let sigma_minus = derive_widths(cfg).map(|w| w.sigma_minus).unwrap_or(f64::NAN);
    let arg = 2f64.sqrt() * cfg.lambda_signal * (x_c - near_field_edge_image(cfg, edge))
        / (cfg.signal_magnification * (cfg.lambda_idler + cfg.lambda_signal) * sigma_minus);
    0.5 * cfg.near_field_transmission * (1.0 + edge_sign(edge.blocked, Mode::NearField) * erf_eval(arg))
}

/// Normalised far-field single-photon counting rate.
pub fn counting_rate_ff(cfg: &OpticalConfig, edge: &KnifeEdge, x_c: f64, phi_in: f64) -> f64 {
    1.0 + far_field_visibility(cfg, edge, x_c) * phi_in.cos()
}

/// Normalised near-field single-photon counting rate.
pub fn counting_rate_nf(cfg: &OpticalConfig, edge: &KnifeEdge, x_c: f64, phi_in: f64) -> f64 {
    1.0 + near_field_visibility(cfg, edge, x_c) * phi_in.cos()
}

/// Mean counts at every pixel centre for one interferometric phase,
/// row-major `height × width`.
pub fn expected_image(scene: &SceneSpec, camera: &CameraSpec, phi_in: f64) -> Vec<f64> {
    let cos_phi = phi_in.cos();
    let column_rate: Vec<f64> = (0..camera.width)
        .map(|c| 1.0 + scene.visibility(camera.coordinate(c)) * cos_phi)
        .collect();
    let mut image = Vec::with_capacity(camera.pixels());
    for row in 0..camera.height {
        let y = camera.coordinate(row);
        for (col, rate) in column_rate.iter().enumerate() {
            let envelope = scene
                .envelope
                .map_or(1.0, |env| env.value(camera.coordinate(col), y));
            image.push(camera.mean_counts * envelope * rate + camera.dark_rate);
        }
    }
    image
}

// Stream ids: frame-level jitter draws live above every pixel stream.
const JITTER_STREAM: u64 = 1 << 63;

fn substream(base: &ChaCha8Rng, stream: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(stream);
    rng
}

/// Realised phase of every frame after jitter.
fn realised_phases(scan: &PhaseScan, base: &ChaCha8Rng) -> Vec<f64> {
    if scan.jitter_sigma == 0.0 {
        return scan.phases.clone();
    }
    let normal = Normal::new(0.0, scan.jitter_sigma).expect("validated jitter");
    scan.phases
        .iter()
        .enumerate()
        .map(|(i, &phi)| phi + normal.sample(&mut substream(base, JITTER_STREAM | i as u64)))
        .collect()
}

fn draw_count(mean: f64, readout: Option<&Normal<f64>>, rng: &mut ChaCha8Rng) -> u32 {
    let mut value = if mean > 0.0 {
        Poisson::new(mean).expect("finite positive mean").sample(rng)
    } else {
        0.0
    };
    if let Some(normal) = readout {
        value += normal.sample(rng).round();
    }
    value.max(0.0).min(u32::MAX as f64) as u32
}

/// Draw a noisy frame stack.
///
/// Every (frame, pixel) sample comes from its own ChaCha8 stream keyed by
/// `seed`, so the result does not depend on evaluation order or thread count.
pub fn simulate_stack(scene: &SceneSpec, camera: &CameraSpec, scan: &PhaseScan, seed: u64) -> Result<FrameStack> {
    scene.validate()?;
    camera.validate()?;
    scan.validate()?;

    let base = ChaCha8Rng::seed_from_u64(seed);
    let phases = realised_phases(scan, &base);
    let readout = (camera.readout_sigma > 0.0)
        .then(|| Normal::new(0.0, camera.readout_sigma).expect("validated read noise"));
    let n_pix = camera.pixels();

    let frames: Vec<u32> = phases
        .par_iter()
        .enumerate()
        .flat_map_iter(|(f, &phi)| {
            let mean = expected_image(scene, camera, phi);
            let base = &base;
            let readout = readout.as_ref();
            mean.into_iter().enumerate().map(move |(p, m)| {
                let mut rng = substream(base, (f * n_pix + p) as u64);
                draw_count(m, readout, &mut rng)
            })
        })
        .collect();

    Ok(FrameStack {
        camera: *camera,
        scan: scan.clone(),
        frames,
        seed,
        scene: *scene,
    })
}

/// Exact (floating-point) mean counts for every phase, frame-major.
pub fn expected_stack(scene: &SceneSpec, camera: &CameraSpec, scan: &PhaseScan) -> Result<Vec<f64>> {
    scene.validate()?;
    camera.validate()?;
    scan.validate()?;
    Ok(scan
        .phases
        .iter()
        .flat_map(|&phi| expected_image(scene, camera, phi))
        .collect())
}

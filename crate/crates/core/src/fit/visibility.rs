//! Per-pixel visibility maps and averaged cross sections.

use rayon::prelude::*;

use super::sinusoid::{SinusoidFit, SinusoidFitter};
use crate::error::{Error, Result};
use crate::sim::{CameraSpec, FrameStack};

/// Pixels whose fitted offset is below this many counts are masked.
pub const DEFAULT_OFFSET_FLOOR: f64 = 1.0;

/// Row-major grid of sinusoid fits with a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct VisibilityMap {
    pub width: usize,
    pub height: usize,
    pub pixel_pitch: f64,
    pub origin_offset: f64,
    pub fits: Vec<SinusoidFit>,
    pub valid: Vec<bool>,
}

impl VisibilityMap {
    /// Fit every pixel of a frame-major sample array
    /// (`samples[f·pixels + row·width + col]`).
    pub fn from_samples(camera: &CameraSpec, phases: &[f64], samples: &[f64], floor: f64) -> Result<Self> {
        let n_pix = camera.pixels();
        if samples.len() != n_pix * phases.len() {
            return Err(Error::LengthMismatch {
                phases: phases.len() * n_pix,
                counts: samples.len(),
            });
        }
        let fitter = SinusoidFitter::new(phases)?;
        let n_frames = phases.len();
        let fits: Vec<SinusoidFit> = (0..n_pix)
            .into_par_iter()
            .map_init(
                || vec![0.0; n_frames],
                |series, p| {
                    for (f, slot) in series.iter_mut().enumerate() {
                        *slot = samples[f * n_pix + p];
                    }
                    fitter.fit_unchecked(series)
                },
            )
            .collect();
        let valid = fits.iter().map(|fit| fit.valid && fit.offset >= floor).collect();
        Ok(Self {
            width: camera.width,
            height: camera.height,
            pixel_pitch: camera.pixel_pitch,
            origin_offset: camera.origin_offset,
            fits,
            valid,
        })
    }

    pub fn get(&self, row: usize, col: usize) -> &SinusoidFit {
        &self.fits[row * self.width + col]
    }

    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.valid[row * self.width + col]
    }

    /// Camera-plane x coordinate of a column centre.
    pub fn column_position(&self, col: usize) -> f64 {
        self.origin_offset + col as f64 * self.pixel_pitch
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }
}

/// Visibility map of a recorded stack with the default offset floor.
pub fn build_visibility_map(stack: &FrameStack) -> Result<VisibilityMap> {
    build_visibility_map_with_floor(stack, DEFAULT_OFFSET_FLOOR)
}

pub fn build_visibility_map_with_floor(stack: &FrameStack, floor: f64) -> Result<VisibilityMap> {
    let samples: Vec<f64> = stack.frames.iter().map(|&c| c as f64).collect();
    VisibilityMap::from_samples(&stack.camera, &stack.scan.phases, &samples, floor)
}

/// Column-wise visibility averaged over a band of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EsfProfile {
    /// Column-centre positions [m], strictly increasing.
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    /// Sample standard deviation across the band (0 for a single row).
    pub std: Vec<f64>,
    pub rows_averaged: usize,
}

impl EsfProfile {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The same profile reflected through `x = 0`.
    pub fn mirrored(&self) -> Self {
        Self {
            x: self.x.iter().rev().map(|x| -x).collect(),
            mean: self.mean.iter().rev().copied().collect(),
            std: self.std.iter().rev().copied().collect(),
            rows_averaged: self.rows_averaged,
        }
    }

    /// Every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            x: self.x.clone(),
            mean: self.mean.iter().map(|v| v * factor).collect(),
            std: self.std.iter().map(|v| v * factor.abs()).collect(),
            rows_averaged: self.rows_averaged,
        }
    }
}

fn band_rows(center: usize, rows: usize, height: usize) -> Result<(usize, usize)> {
    let half = rows / 2;
    if rows == 0 || center < half || center - half + rows > height {
        return Err(Error::BandOutOfRange {
            start: center.saturating_sub(half),
            end: center.saturating_sub(half) + rows,
            height,
        });
    }
    Ok((center - half, center - half + rows))
}

/// How the visibilities of one column are combined across the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandAverage {
    /// Average the fringe phasors `V·e^{iφ0}` and take the magnitude. The
    /// scanned phase is common to the whole frame, so signal adds
    /// coherently while the noise floor of `|V|` shrinks with the band
    /// height.
    #[default]
    Phasor,
    /// Average the magnitudes `V` directly. Biased upward where the true
    /// visibility is small compared with its noise.
    Magnitude,
}

/// Mean and spread of the visibility over `rows` rows centred on
/// `band_center_row`, excluding masked pixels. Columns with no valid pixel
/// in the band are dropped.
pub fn extract_cross_section(map: &VisibilityMap, band_center_row: usize, rows: usize) -> Result<EsfProfile> {
    extract_cross_section_with(map, band_center_row, rows, BandAverage::default())
}

pub fn extract_cross_section_with(
    map: &VisibilityMap,
    band_center_row: usize,
    rows: usize,
    average: BandAverage,
) -> Result<EsfProfile> {
    let (start, end) = band_rows(band_center_row, rows, map.height)?;
    let mut profile = EsfProfile {
        x: Vec::with_capacity(map.width),
        mean: Vec::with_capacity(map.width),
        std: Vec::with_capacity(map.width),
        rows_averaged: rows,
    };
    for col in 0..map.width {
        let fits: Vec<&SinusoidFit> = (start..end)
            .filter(|&row| map.is_valid(row, col))
            .map(|row| map.get(row, col))
            .collect();
        if fits.is_empty() {
            continue;
        }
        let n = fits.len() as f64;
        // Per-row values whose mean is the column value.
        let values: Vec<f64> = match average {
            BandAverage::Magnitude => fits.iter().map(|f| f.visibility).collect(),
            BandAverage::Phasor => {
                let (re, im) = fits.iter().fold((0.0, 0.0), |(re, im), f| {
                    (re + f.visibility * f.phase.cos(), im + f.visibility * f.phase.sin())
                });
                let mean_phase = im.atan2(re);
                fits.iter().map(|f| f.visibility * (f.phase - mean_phase).cos()).collect()
            }
        };
        let mean = values.iter().sum::<f64>() / n;
        let std = if fits.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        profile.x.push(map.column_position(col));
        profile.mean.push(mean);
        profile.std.push(std);
    }
    if profile.is_empty() {
        return Err(Error::EmptyBand);
    }
    Ok(profile)
}

/// Centre row of the `rows`-high band with the largest mean visibility.
pub fn best_band_center(map: &VisibilityMap, rows: usize) -> Result<usize> {
    let half = rows / 2;
    if rows == 0 || rows > map.height {
        return Err(Error::BandOutOfRange {
            start: 0,
            end: rows,
            height: map.height,
        });
    }
    let row_stats: Vec<(f64, usize)> = (0..map.height)
        .map(|row| {
            (0..map.width)
                .filter(|&c| map.is_valid(row, c))
                .fold((0.0, 0), |(s, n), c| (s + map.get(row, c).visibility, n + 1))
        })
        .collect();
    let mut best: Option<(f64, usize)> = None;
    for start in 0..=map.height - rows {
        let (sum, n) = row_stats[start..start + rows]
            .iter()
            .fold((0.0, 0), |(s, n), &(rs, rn)| (s + rs, n + rn));
        if n == 0 {
            continue;
        }
        let mean = sum / n as f64;
        if best.is_none_or(|(m, _)| mean > m) {
            best = Some((mean, start + half));
        }
    }
    best.map(|(_, c)| c).ok_or(Error::EmptyBand)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_map(width: usize, height: usize, v: f64) -> VisibilityMap {
        let fit = SinusoidFit {
            offset: 100.0,
            amplitude: 100.0 * v,
            phase: 0.0,
            visibility: v,
            rms_residual: 0.0,
            valid: true,
        };
        VisibilityMap {
            width,
            height,
            pixel_pitch: 1e-5,
            origin_offset: 0.0,
            fits: vec![fit; width * height],
            valid: vec![true; width * height],
        }
    }

    #[test]
    fn uniform_map_gives_flat_profile() {
        let map = uniform_map(10, 30, 0.25);
        let p = extract_cross_section(&map, 15, 20).unwrap();
        assert_eq!(p.len(), 10);
        assert!(p.mean.iter().all(|&m| (m - 0.25).abs() < 1e-15));
        assert!(p.std.iter().all(|&s| s == 0.0));
        assert!(p.x.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn single_row_reproduces_row() {
        let mut map = uniform_map(8, 8, 0.0);
        for col in 0..8 {
            map.fits[3 * 8 + col].visibility = col as f64 * 0.1;
        }
        let p = extract_cross_section(&map, 3, 1).unwrap();
        for col in 0..8 {
            assert_eq!(p.mean[col], col as f64 * 0.1);
        }
    }

    #[test]
    fn invalid_pixels_excluded() {
        let mut map = uniform_map(8, 8, 0.2);
        map.fits[2 * 8 + 1].visibility = 9.0;
        map.valid[2 * 8 + 1] = false;
        let p = extract_cross_section(&map, 4, 8).unwrap();
        assert!((p.mean[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn fully_invalid_band_is_error() {
        let mut map = uniform_map(8, 8, 0.2);
        map.valid.iter_mut().for_each(|v| *v = false);
        assert!(matches!(extract_cross_section(&map, 4, 2), Err(Error::EmptyBand)));
    }

    #[test]
    fn band_outside_image_is_error() {
        let map = uniform_map(8, 8, 0.2);
        assert!(extract_cross_section(&map, 2, 20).is_err());
        assert!(extract_cross_section(&map, 7, 4).is_err());
        assert!(extract_cross_section(&map, 0, 0).is_err());
    }

    #[test]
    fn best_band_finds_bright_rows() {
        let mut map = uniform_map(8, 40, 0.1);
        for row in 25..30 {
            for col in 0..8 {
                map.fits[row * 8 + col].visibility = 0.5;
            }
        }
        let center = best_band_center(&map, 5).unwrap();
        assert_eq!(center, 27);
    }

    #[test]
    fn phasor_average_suppresses_noise_floor() {
        use crate::physics::OpticalConfig;
        use crate::sim::{simulate_stack, Mode, PhaseScan, SceneSpec};
        // No induced coherence: every visibility is pure noise.
        let optics = OpticalConfig {
            near_field_transmission: 0.0,
            ..Default::default()
        };
        let camera = CameraSpec::centered(16, 2e-6, 200.0);
        let stack = simulate_stack(&SceneSpec::new(Mode::NearField, optics), &camera, &PhaseScan::default(), 9).unwrap();
        let map = build_visibility_map(&stack).unwrap();
        let mean = |p: &EsfProfile| p.mean.iter().sum::<f64>() / p.len() as f64;
        let magnitude = mean(&extract_cross_section_with(&map, 8, 16, BandAverage::Magnitude).unwrap());
        let phasor = mean(&extract_cross_section_with(&map, 8, 16, BandAverage::Phasor).unwrap());
        // Rician floor sqrt(π/2)·sqrt(2/(N·mean)) ≈ 0.0066.
        assert!((magnitude - 0.0066).abs() < 0.001, "{magnitude}");
        assert!(phasor < 0.5 * magnitude, "{phasor} vs {magnitude}");
    }

    #[test]
    fn phasor_equals_magnitude_for_common_phase() {
        let map = uniform_map(10, 6, 0.25);
        let a = extract_cross_section_with(&map, 3, 4, BandAverage::Phasor).unwrap();
        let b = extract_cross_section_with(&map, 3, 4, BandAverage::Magnitude).unwrap();
        for (x, y) in a.mean.iter().zip(&b.mean) {
            assert!((x - y).abs() < 1e-15);
        }
    }
}

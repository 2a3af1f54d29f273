//! Fringe and edge-spread analysis: per-pixel sinusoid fits, visibility
//! maps, row-band cross sections and the error-function edge fit.

pub mod esf;
pub mod sinusoid;
pub mod special;
pub mod visibility;

pub use esf::{fit_esf, fit_esf_with, rise_width_24_76, EsfFit, EsfFitOptions, EsfSign, Weighting};
pub use sinusoid::{fit_sinusoid, SinusoidFit, SinusoidFitter};
pub use special::{erf_eval, erf_inv};
pub use visibility::{
    best_band_center, build_visibility_map, build_visibility_map_with_floor, extract_cross_section,
    extract_cross_section_with, BandAverage, EsfProfile, VisibilityMap, DEFAULT_OFFSET_FLOOR,
};

use crate::error::Result;

/// Rows averaged for the cross section unless told otherwise.
pub const DEFAULT_BAND_ROWS: usize = 20;

/// Band selection, averaged profile and erf fit of one visibility map.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeAnalysis {
    pub band_center: usize,
    pub rows: usize,
    pub profile: EsfProfile,
    pub fit: EsfFit,
}

/// Average `rows` rows around `band_center` (default: the brightest band)
/// and fit the edge, detecting its direction unless `sign` is given.
pub fn analyze_map(
    map: &VisibilityMap,
    rows: usize,
    band_center: Option<usize>,
    sign: Option<EsfSign>,
) -> Result<EdgeAnalysis> {
    analyze_map_with(map, rows, band_center, sign, BandAverage::default())
}

pub fn analyze_map_with(
    map: &VisibilityMap,
    rows: usize,
    band_center: Option<usize>,
    sign: Option<EsfSign>,
    average: BandAverage,
) -> Result<EdgeAnalysis> {
    let band_center = match band_center {
        Some(c) => c,
        None => best_band_center(map, rows)?,
    };
    let profile = extract_cross_section_with(map, band_center, rows, average)?;
    let sign = sign.unwrap_or_else(|| EsfSign::detect(&profile));
    let fit = fit_esf(&profile, sign)?;
    Ok(EdgeAnalysis {
        band_center,
        rows,
        profile,
        fit,
    })
}

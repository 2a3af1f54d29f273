//! Visibility CSV and JSON reports.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::entanglement::{EntanglementReport, Space, WidthMeasurement};
use crate::error::{Error, Result};
use crate::fit::{rise_width_24_76, EdgeAnalysis, EsfSign, SinusoidFit, VisibilityMap};
use crate::io::stack::meta_path;
use crate::sim::Mode;

pub const VISIBILITY_HEADER: &str = "row,col,offset,amplitude,phase,visibility,valid";
pub const ESF_SCHEMA: &str = "icfs.esf/1";

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One record per pixel, row-major, numbers with 17 significant digits.
pub fn render_visibility_csv(map: &VisibilityMap) -> String {
    let mut out = String::with_capacity(96 * (map.fits.len() + 1));
    out.push_str(VISIBILITY_HEADER);
    out.push('\n');
    for row in 0..map.height {
        for col in 0..map.width {
            let f = map.get(row, col);
            let _ = writeln!(
                out,
                "{row},{col},{},{},{},{},{}",
                num(f.offset),
                num(f.amplitude),
                num(f.phase),
                num(f.visibility),
                u8::from(map.is_valid(row, col))
            );
        }
    }
    out
}

/// Geometry that the CSV itself does not carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityMeta {
    pub mode: Mode,
    pub width: usize,
    pub height: usize,
    pub pixel_pitch: f64,
    pub origin_offset: f64,
}

impl VisibilityMeta {
    pub fn of(map: &VisibilityMap, mode: Mode) -> Self {
        Self {
            mode,
            width: map.width,
            height: map.height,
            pixel_pitch: map.pixel_pitch,
            origin_offset: map.origin_offset,
        }
    }

    pub fn render(&self) -> String {
        format!(
            "mode = {}\nwidth = {}\nheight = {}\npixel_pitch = {}\norigin_offset = {}\n",
            self.mode.as_str(),
            self.width,
            self.height,
            num(self.pixel_pitch),
            num(self.origin_offset)
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |line: usize, message: String| Error::Malformed {
            what: "visibility metadata",
            line,
            message,
        };
        let (mut mode, mut width, mut height, mut pitch, mut offset) = (None, None, None, None, None);
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let content = line.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let (k, v) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(line_no, "expected `key = value`".into()))?;
            let float = |v: &str| v.parse::<f64>().map_err(|_| bad(line_no, format!("{k}: bad number `{v}`")));
            let int = |v: &str| v.parse::<usize>().map_err(|_| bad(line_no, format!("{k}: bad integer `{v}`")));
            match k {
                "mode" => mode = Some(v.parse::<Mode>().map_err(|e| bad(line_no, e))?),
                "width" => width = Some(int(v)?),
                "height" => height = Some(int(v)?),
                "pixel_pitch" => pitch = Some(float(v)?),
                "origin_offset" => offset = Some(float(v)?),
                other => return Err(bad(line_no, format!("unknown key `{other}`"))),
            }
        }
        let missing = |k: &str| bad(0, format!("missing `{k}`"));
        Ok(Self {
            mode: mode.ok_or_else(|| missing("mode"))?,
            width: width.ok_or_else(|| missing("width"))?,
            height: height.ok_or_else(|| missing("height"))?,
            pixel_pitch: pitch.ok_or_else(|| missing("pixel_pitch"))?,
            origin_offset: offset.ok_or_else(|| missing("origin_offset"))?,
        })
    }
}

/// Parse the CSV against known geometry. The residual is not stored and
/// comes back as NaN.
pub fn parse_visibility_csv(text: &str, meta: &VisibilityMeta) -> Result<VisibilityMap> {
    let bad = |line: usize, message: String| Error::Malformed {
        what: "visibility csv",
        line,
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == VISIBILITY_HEADER => {}
        other => return Err(bad(1, format!("expected header `{VISIBILITY_HEADER}`, got `{}`", other.unwrap_or("")))),
    }
    let n = meta.width * meta.height;
    let mut fits = Vec::with_capacity(n);
    let mut valid = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let line_no = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 7 {
            return Err(bad(line_no, format!("expected 7 fields, got {}", fields.len())));
        }
        let index = fits.len();
        let (row, col) = (index / meta.width.max(1), index % meta.width.max(1));
        let got: (usize, usize) = (
            fields[0].parse().map_err(|_| bad(line_no, format!("bad row `{}`", fields[0])))?,
            fields[1].parse().map_err(|_| bad(line_no, format!("bad col `{}`", fields[1])))?,
        );
        if index >= n || got != (row, col) {
            return Err(bad(line_no, format!("expected pixel ({row}, {col}), got {got:?}")));
        }
        let mut v = [0.0; 4];
        for (slot, field) in v.iter_mut().zip(&fields[2..6]) {
            *slot = field.parse().map_err(|_| bad(line_no, format!("bad number `{field}`")))?;
        }
        let is_valid = match fields[6] {
            "1" => true,
            "0" => false,
            other => return Err(bad(line_no, format!("valid must be 0 or 1, got `{other}`"))),
        };
        fits.push(SinusoidFit {
            offset: v[0],
            amplitude: v[1],
            phase: v[2],
            visibility: v[3],
            rms_residual: f64::NAN,
            valid: v[0].is_finite(),
        });
        valid.push(is_valid);
    }
    if fits.len() != n {
        return Err(bad(0, format!("expected {n} records, got {}", fits.len())));
    }
    Ok(VisibilityMap {
        width: meta.width,
        height: meta.height,
        pixel_pitch: meta.pixel_pitch,
        origin_offset: meta.origin_offset,
        fits,
        valid,
    })
}

pub fn write_visibility(path: impl AsRef<Path>, map: &VisibilityMap, mode: Mode) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_visibility_csv(map)).map_err(|e| Error::io(path, e))?;
    let mp = meta_path(path);
    std::fs::write(&mp, VisibilityMeta::of(map, mode).render()).map_err(|e| Error::io(&mp, e))
}

pub fn read_visibility(path: impl AsRef<Path>) -> Result<(VisibilityMap, VisibilityMeta)> {
    let path = path.as_ref();
    let mp = meta_path(path);
    let meta_text = std::fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
    let meta = VisibilityMeta::parse(&meta_text)?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok((parse_visibility_csv(&text, &meta)?, meta))
}

/// Edge fit as written by `icfs esf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EsfReport {
    pub schema: String,
    pub mode: String,
    pub v_max: f64,
    pub x0_m: f64,
    #[serde(rename = "D_m")]
    pub d_m: f64,
    #[serde(rename = "D_sigma_m")]
    pub d_sigma_m: f64,
    pub sign: String,
    /// Order `(v_max, x0, D)`.
    pub covariance: [[f64; 3]; 3],
    pub converged: bool,
    pub iterations: usize,
    pub rms_residual: f64,
    pub rise_24_76_m: f64,
    pub rows: usize,
    pub band_center_row: usize,
}

impl EsfReport {
    pub fn new(analysis: &EdgeAnalysis, mode: Mode) -> Self {
        let fit = &analysis.fit;
        Self {
            schema: ESF_SCHEMA.to_string(),
            mode: mode.as_str().to_string(),
            v_max: fit.v_max,
            x0_m: fit.x0,
            d_m: fit.width,
            d_sigma_m: fit.width_sigma(),
            sign: fit.sign.as_str().to_string(),
            covariance: fit.covariance,
            converged: fit.converged,
            iterations: fit.iterations,
            rms_residual: fit.rms_residual,
            rise_24_76_m: rise_width_24_76(fit),
            rows: analysis.rows,
            band_center_row: analysis.band_center,
        }
    }

    pub fn mode(&self) -> Result<Mode> {
        self.mode
            .parse()
            .map_err(|e: String| Error::InvalidWidth(format!("ESF report: {e}")))
    }

    pub fn sign(&self) -> Result<EsfSign> {
        self.sign
            .parse()
            .map_err(|e: String| Error::InvalidWidth(format!("ESF report: {e}")))
    }

    /// The width with its fitted uncertainty, tagged by the report's mode.
    pub fn width_measurement(&self) -> Result<WidthMeasurement> {
        let space = match self.mode()? {
            Mode::FarField => Space::Momentum,
            Mode::NearField => Space::Position,
        };
        WidthMeasurement::new(self.d_m, self.d_sigma_m, space)
    }
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_entanglement_report(path: impl AsRef<Path>, report: &EntanglementReport) -> Result<()> {
    write_json(path, report)
}

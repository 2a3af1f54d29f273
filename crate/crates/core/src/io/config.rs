//! `key = value` run configuration.
//!
//! One setting per line, `#` starts a comment, blank lines are ignored.
//! Every key is optional; unknown or repeated keys are errors, and every
//! error names the key and the line it came from.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::entanglement::Estimate;
use crate::error::{Error, Result};
use crate::oracle::{OracleSettings, Rule, MIN_POINTS};
use crate::physics::{BlockedSide, KnifeEdge, OpticalConfig};
use crate::sim::{CameraSpec, Envelope, Mode, PhaseScan, SceneSpec, MIN_PHASES};

/// Camera settings shared by both configurations; pitch and origin are set
/// per configuration because the far-field edge is about twenty times wider.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraConfig {
    pub width: usize,
    pub height: usize,
    pub pixel_pitch_ff: f64,
    pub pixel_pitch_nf: f64,
    /// `None` centres the optical axis on the sensor.
    pub origin_offset_ff: Option<f64>,
    pub origin_offset_nf: Option<f64>,
    pub mean_counts: f64,
    pub readout_sigma: f64,
    pub dark_rate: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            pixel_pitch_ff: 16e-6,
            pixel_pitch_nf: 2e-6,
            origin_offset_ff: None,
            origin_offset_nf: None,
            mean_counts: 200.0,
            readout_sigma: 0.0,
            dark_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub frames: usize,
    pub cycles: f64,
    pub jitter_sigma: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            frames: 360,
            cycles: 1.0,
            jitter_sigma: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportConfig {
    /// Product to compare the measured one against; `None` disables the
    /// comparison.
    pub reference: Option<Estimate>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        Self {
            reference: Some(Estimate::new(0.033, 0.0075)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub optics: OpticalConfig,
    pub edge: KnifeEdge,
    pub camera: CameraConfig,
    pub scan: ScanConfig,
    pub envelope: Option<Envelope>,
    pub report: ReportConfig,
    pub oracle: OracleSettings,
}

const KEYS: &[&str] = &[
    "optics.lambda_pump",
    "optics.lambda_signal",
    "optics.lambda_idler",
    "optics.crystal_length",
    "optics.pump_waist",
    "optics.focal_length",
    "optics.signal_magnification",
    "optics.idler_magnification",
    "optics.far_field_transmission",
    "optics.near_field_transmission",
    "edge.position",
    "edge.blocked_side",
    "camera.width",
    "camera.height",
    "camera.pixel_pitch_ff",
    "camera.pixel_pitch_nf",
    "camera.origin_offset_ff",
    "camera.origin_offset_nf",
    "camera.mean_counts",
    "camera.readout_sigma",
    "camera.dark_rate",
    "scan.frames",
    "scan.cycles",
    "scan.jitter_sigma",
    "envelope.waist",
    "envelope.center_x",
    "envelope.center_y",
    "report.reference_product",
    "report.reference_sigma",
    "oracle.span_sigmas",
    "oracle.points",
    "oracle.rule",
    "oracle.min_coverage",
];

struct Entry<'a> {
    source: &'a str,
    line: usize,
    key: &'a str,
    value: &'a str,
}

impl Entry<'_> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::ConfigParse {
            path: self.source.to_string(),
            line: self.line,
            key: self.key.to_string(),
            message: message.into(),
        }
    }

    fn float(&self) -> Result<f64> {
        let v: f64 = self
            .value
            .parse()
            .map_err(|_| self.err(format!("expected a number, got `{}`", self.value)))?;
        if !v.is_finite() {
            return Err(self.err("value must be finite"));
        }
        Ok(v)
    }

    fn positive(&self) -> Result<f64> {
        let v = self.float()?;
        if v <= 0.0 {
            return Err(self.err(format!("must be > 0, got {v}")));
        }
        Ok(v)
    }

    fn non_negative(&self) -> Result<f64> {
        let v = self.float()?;
        if v < 0.0 {
            return Err(self.err(format!("must be >= 0, got {v}")));
        }
        Ok(v)
    }

    fn fraction(&self) -> Result<f64> {
        let v = self.float()?;
        if !(0.0..=1.0).contains(&v) {
            return Err(self.err(format!("must lie in [0, 1], got {v}")));
        }
        Ok(v)
    }

    fn integer(&self, min: usize) -> Result<usize> {
        let v: usize = self
            .value
            .parse()
            .map_err(|_| self.err(format!("expected a non-negative integer, got `{}`", self.value)))?;
        if v < min {
            return Err(self.err(format!("must be at least {min}, got {v}")));
        }
        Ok(v)
    }

    fn optional(&self) -> Option<&str> {
        (self.value != "none").then_some(self.value)
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parse a document; `source` names it in error messages.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
        let mut cfg = RunConfig::default();
        let mut waist: Option<f64> = None;
        let mut center = [0.0, 0.0];
        let mut centre_line: Option<(usize, &str)> = None;
        let mut ref_value = cfg.report.reference.map(|r| r.value);
        let mut ref_sigma = cfg.report.reference.map(|r| r.sigma).unwrap_or(0.0);

        for (index, raw) in text.lines().enumerate() {
            let line = index + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(Error::ConfigParse {
                    path: source.to_string(),
                    line,
                    key: content.to_string(),
                    message: "expected `key = value`".into(),
                });
            };
            let e = Entry {
                source,
                line,
                key: key.trim(),
                value: value.trim(),
            };
            if !KEYS.contains(&e.key) {
                return Err(e.err("unknown key"));
            }
            if let Some(first) = seen.insert(e.key, line) {
                return Err(e.err(format!("repeated key, first set on line {first}")));
            }
            let o = &mut cfg.optics;
            match e.key {
                "optics.lambda_pump" => o.lambda_pump = e.positive()?,
                "optics.lambda_signal" => o.lambda_signal = e.positive()?,
                "optics.lambda_idler" => o.lambda_idler = e.positive()?,
                "optics.crystal_length" => o.crystal_length = e.positive()?,
                "optics.pump_waist" => o.pump_waist = e.positive()?,
                "optics.focal_length" => o.focal_length = e.positive()?,
                "optics.signal_magnification" => o.signal_magnification = e.positive()?,
                "optics.idler_magnification" => o.idler_magnification = e.positive()?,
                "optics.far_field_transmission" => o.far_field_transmission = e.fraction()?,
                "optics.near_field_transmission" => o.near_field_transmission = e.fraction()?,
                "edge.position" => cfg.edge.position = e.float()?,
                "edge.blocked_side" => {
                    cfg.edge.blocked = match e.value {
                        "below" => BlockedSide::Below,
                        "above" => BlockedSide::Above,
                        other => return Err(e.err(format!("expected `below` or `above`, got `{other}`"))),
                    }
                }
                "camera.width" => cfg.camera.width = e.integer(8)?,
                "camera.height" => cfg.camera.height = e.integer(8)?,
                "camera.pixel_pitch_ff" => cfg.camera.pixel_pitch_ff = e.positive()?,
                "camera.pixel_pitch_nf" => cfg.camera.pixel_pitch_nf = e.positive()?,
                "camera.origin_offset_ff" => {
                    cfg.camera.origin_offset_ff = e.optional().map(|_| e.float()).transpose()?
                }
                "camera.origin_offset_nf" => {
                    cfg.camera.origin_offset_nf = e.optional().map(|_| e.float()).transpose()?
                }
                "camera.mean_counts" => cfg.camera.mean_counts = e.non_negative()?,
                "camera.readout_sigma" => cfg.camera.readout_sigma = e.non_negative()?,
                "camera.dark_rate" => cfg.camera.dark_rate = e.non_negative()?,
                "scan.frames" => cfg.scan.frames = e.integer(MIN_PHASES)?,
                "scan.cycles" => cfg.scan.cycles = e.positive()?,
                "scan.jitter_sigma" => cfg.scan.jitter_sigma = e.non_negative()?,
                "envelope.waist" => waist = e.optional().map(|_| e.positive()).transpose()?,
                "envelope.center_x" => {
                    center[0] = e.float()?;
                    centre_line.get_or_insert((line, "envelope.center_x"));
                }
                "envelope.center_y" => {
                    center[1] = e.float()?;
                    centre_line.get_or_insert((line, "envelope.center_y"));
                }
                "report.reference_product" => ref_value = e.optional().map(|_| e.positive()).transpose()?,
                "report.reference_sigma" => ref_sigma = e.non_negative()?,
                "oracle.span_sigmas" => cfg.oracle.span_sigmas = e.positive()?,
                "oracle.points" => cfg.oracle.points = e.integer(MIN_POINTS)?,
                "oracle.rule" => cfg.oracle.rule = e.value.parse::<Rule>().map_err(|err| e.err(err.to_string()))?,
                "oracle.min_coverage" => cfg.oracle.min_coverage = e.positive()?,
                _ => unreachable!("key list and match arms disagree"),
            }
        }

        if let (None, Some((line, key))) = (waist, centre_line) {
            return Err(Error::ConfigParse {
                path: source.to_string(),
                line,
                key: key.to_string(),
                message: "envelope centre given without envelope.waist".into(),
            });
        }
        cfg.envelope = waist.map(|waist| Envelope { center, waist });
        cfg.report.reference = ref_value.map(|v| Estimate::new(v, ref_sigma));
        Ok(cfg)
    }

    /// Canonical document listing every setting; parses back to `self`.
    pub fn render(&self) -> String {
        fn f(v: f64) -> String {
            format!("{v:e}")
        }
        fn opt(v: Option<f64>) -> String {
            v.map(f).unwrap_or_else(|| "none".into())
        }
        let o = &self.optics;
        let c = &self.camera;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("optics.lambda_pump", f(o.lambda_pump));
        put("optics.lambda_signal", f(o.lambda_signal));
        put("optics.lambda_idler", f(o.lambda_idler));
        put("optics.crystal_length", f(o.crystal_length));
        put("optics.pump_waist", f(o.pump_waist));
        put("optics.focal_length", f(o.focal_length));
        put("optics.signal_magnification", f(o.signal_magnification));
        put("optics.idler_magnification", f(o.idler_magnification));
        put("optics.far_field_transmission", f(o.far_field_transmission));
        put("optics.near_field_transmission", f(o.near_field_transmission));
        put("edge.position", f(self.edge.position));
        put(
            "edge.blocked_side",
            match self.edge.blocked {
                BlockedSide::Below => "below".into(),
                BlockedSide::Above => "above".into(),
            },
        );
        put("camera.width", c.width.to_string());
        put("camera.height", c.height.to_string());
        put("camera.pixel_pitch_ff", f(c.pixel_pitch_ff));
        put("camera.pixel_pitch_nf", f(c.pixel_pitch_nf));
        put("camera.origin_offset_ff", opt(c.origin_offset_ff));
        put("camera.origin_offset_nf", opt(c.origin_offset_nf));
        put("camera.mean_counts", f(c.mean_counts));
        put("camera.readout_sigma", f(c.readout_sigma));
        put("camera.dark_rate", f(c.dark_rate));
        put("scan.frames", self.scan.frames.to_string());
        put("scan.cycles", f(self.scan.cycles));
        put("scan.jitter_sigma", f(self.scan.jitter_sigma));
        if let Some(env) = &self.envelope {
            put("envelope.waist", f(env.waist));
            put("envelope.center_x", f(env.center[0]));
            put("envelope.center_y", f(env.center[1]));
        }
        put("report.reference_product", opt(self.report.reference.map(|r| r.value)));
        if let Some(r) = &self.report.reference {
            put("report.reference_sigma", f(r.sigma));
        }
        put("oracle.span_sigmas", f(self.oracle.span_sigmas));
        put("oracle.points", self.oracle.points.to_string());
        put("oracle.rule", self.oracle.rule.as_str().into());
        put("oracle.min_coverage", f(self.oracle.min_coverage));
        out
    }

    pub fn camera(&self, mode: Mode) -> CameraSpec {
        let c = &self.camera;
        let (pitch, offset) = match mode {
            Mode::FarField => (c.pixel_pitch_ff, c.origin_offset_ff),
            Mode::NearField => (c.pixel_pitch_nf, c.origin_offset_nf),
        };
        CameraSpec {
            width: c.width,
            height: c.height,
            pixel_pitch: pitch,
            origin_offset: offset.unwrap_or(-0.5 * (c.width as f64 - 1.0) * pitch),
            mean_counts: c.mean_counts,
            readout_sigma: c.readout_sigma,
            dark_rate: c.dark_rate,
        }
    }

    pub fn scene(&self, mode: Mode) -> SceneSpec {
        SceneSpec {
            mode,
            optics: self.optics,
            edge: self.edge,
            envelope: self.envelope,
        }
    }

    pub fn phase_scan(&self) -> PhaseScan {
        PhaseScan {
            jitter_sigma: self.scan.jitter_sigma,
            ..PhaseScan::uniform(self.scan.frames, self.scan.cycles)
        }
    }
}

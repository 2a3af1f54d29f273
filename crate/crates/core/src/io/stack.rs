//! The `ICFS` frame-stack container.
//!
//! Little-endian layout:
//!
//! ```text
//! 0   magic "ICFS"
//! 4   version u32
//! 8   width u32, height u32, n_frames u32
//! 20  pixel_pitch f64, origin_offset f64
//! 36  seed u64
//! 44  n_frames × phase f64
//! ..  n_frames × height × width × count u16 (frame-major, row-major)
//! ```
//!
//! A sibling `<file>.meta` text document echoes the run configuration plus
//! the mode and the number of counts clipped at 65535.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::io::config::RunConfig;
use crate::sim::{FrameStack, Mode, PhaseScan};

pub const MAGIC: &[u8; 4] = b"ICFS";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 44;

/// Geometry, seed, phases and counts exactly as stored in the binary.
#[derive(Debug, Clone, PartialEq)]
pub struct RawStack {
    pub width: usize,
    pub height: usize,
    pub pixel_pitch: f64,
    pub origin_offset: f64,
    pub seed: u64,
    pub phases: Vec<f64>,
    pub counts: Vec<u16>,
}

impl RawStack {
    pub fn n_frames(&self) -> usize {
        self.phases.len()
    }
}

/// Serialise a stack, clipping counts at `u16::MAX`. Returns the bytes and
/// the number of clipped samples.
pub fn encode_stack(stack: &FrameStack) -> (Vec<u8>, u64) {
    let cam = &stack.camera;
    let n_frames = stack.n_frames();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * n_frames + 2 * stack.frames.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for v in [cam.width, cam.height, n_frames] {
        out.extend_from_slice(&(v as u32).to_le_bytes());
    }
    out.extend_from_slice(&cam.pixel_pitch.to_le_bytes());
    out.extend_from_slice(&cam.origin_offset.to_le_bytes());
    out.extend_from_slice(&stack.seed.to_le_bytes());
    for p in &stack.scan.phases {
        out.extend_from_slice(&p.to_le_bytes());
    }
    let mut saturated = 0u64;
    for &c in &stack.frames {
        let clipped = u16::try_from(c).unwrap_or_else(|_| {
            saturated += 1;
            u16::MAX
        });
        out.extend_from_slice(&clipped.to_le_bytes());
    }
    (out, saturated)
}

fn corrupt(offset: usize, message: impl Into<String>) -> Error {
    Error::CorruptStack {
        offset: offset as u64,
        message: message.into(),
    }
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"))
}

fn u64_at(bytes: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"))
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_bits(u64_at(bytes, at))
}

pub fn decode_stack(bytes: &[u8]) -> Result<RawStack> {
    if bytes.len() < HEADER_LEN {
        return Err(corrupt(bytes.len(), format!("truncated header, need {HEADER_LEN} bytes")));
    }
    if &bytes[0..4] != MAGIC {
        return Err(corrupt(0, "bad magic, expected ICFS"));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(corrupt(4, format!("unsupported version {version}")));
    }
    let (width, height, n_frames) = (
        u32_at(bytes, 8) as usize,
        u32_at(bytes, 12) as usize,
        u32_at(bytes, 16) as usize,
    );
    if width == 0 || height == 0 {
        return Err(corrupt(8, format!("empty sensor {width}x{height}")));
    }
    let pixel_pitch = f64_at(bytes, 20);
    if !(pixel_pitch.is_finite() && pixel_pitch > 0.0) {
        return Err(corrupt(20, format!("invalid pixel pitch {pixel_pitch}")));
    }
    let origin_offset = f64_at(bytes, 28);
    if !origin_offset.is_finite() {
        return Err(corrupt(28, "non-finite origin offset"));
    }
    let seed = u64_at(bytes, 36);

    let samples = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(n_frames))
        .ok_or_else(|| corrupt(8, "declared sizes overflow"))?;
    let counts_at = HEADER_LEN + 8 * n_frames;
    let expected = samples
        .checked_mul(2)
        .and_then(|c| c.checked_add(counts_at))
        .ok_or_else(|| corrupt(8, "declared sizes overflow"))?;
    if bytes.len() < expected {
        return Err(corrupt(
            bytes.len(),
            format!("truncated payload, declared sizes need {expected} bytes"),
        ));
    }
    if bytes.len() > expected {
        return Err(corrupt(expected, format!("{} trailing bytes", bytes.len() - expected)));
    }

    let mut phases = Vec::with_capacity(n_frames);
    for i in 0..n_frames {
        let at = HEADER_LEN + 8 * i;
        let p = f64_at(bytes, at);
        if !p.is_finite() {
            return Err(corrupt(at, format!("non-finite phase in frame {i}")));
        }
        phases.push(p);
    }
    let counts = bytes[counts_at..]
        .chunks_exact(2)
        .map(|c| u16::from_le_bytes([c[0], c[1]]))
        .collect();
    Ok(RawStack {
        width,
        height,
        pixel_pitch,
        origin_offset,
        seed,
        phases,
        counts,
    })
}

/// Metadata stored next to a stack.
#[derive(Debug, Clone, PartialEq)]
pub struct StackMeta {
    pub config: RunConfig,
    pub mode: Mode,
    pub saturated: u64,
}

impl StackMeta {
    pub fn render(&self) -> String {
        format!(
            "# icfs stack metadata\nstack.format_version = {VERSION}\nstack.mode = {}\nstack.saturated_counts = {}\n{}",
            self.mode.as_str(),
            self.saturated,
            self.config.render()
        )
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut mode = None;
        let mut saturated = 0;
        let mut rest = String::new();
        for (i, line) in text.lines().enumerate() {
            let bad = |key: &str, message: String| Error::ConfigParse {
                path: source.to_string(),
                line: i + 1,
                key: key.to_string(),
                message,
            };
            match line.split_once('=').map(|(k, v)| (k.trim(), v.trim())) {
                Some(("stack.mode", v)) => mode = Some(v.parse::<Mode>().map_err(|e| bad("stack.mode", e))?),
                Some(("stack.saturated_counts", v)) => {
                    saturated = v
                        .parse()
                        .map_err(|_| bad("stack.saturated_counts", format!("expected an integer, got `{v}`")))?
                }
                Some(("stack.format_version", v)) => {
                    if v != VERSION.to_string() {
                        return Err(bad("stack.format_version", format!("unsupported version {v}")));
                    }
                }
                // Blank the line so config errors keep their line numbers.
                _ => {
                    rest.push_str(line);
                    rest.push('\n');
                    continue;
                }
            }
            rest.push('\n');
        }
        let config = RunConfig::parse(&rest, source)?;
        let mode = mode.ok_or_else(|| Error::ConfigParse {
            path: source.to_string(),
            line: 0,
            key: "stack.mode".into(),
            message: "missing".into(),
        })?;
        Ok(Self { config, mode, saturated })
    }
}

/// `<path>.meta`.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Write the stack and its metadata; returns the number of clipped counts.
pub fn write_stack(path: impl AsRef<Path>, stack: &FrameStack, config: &RunConfig) -> Result<u64> {
    let path = path.as_ref();
    let (bytes, saturated) = encode_stack(stack);
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))?;
    let meta = StackMeta {
        config: config.clone(),
        mode: stack.scene.mode,
        saturated,
    };
    let mp = meta_path(path);
    std::fs::write(&mp, meta.render()).map_err(|e| Error::io(&mp, e))?;
    Ok(saturated)
}

pub fn read_raw_stack(path: impl AsRef<Path>) -> Result<RawStack> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_stack(&bytes)
}

/// Read a stack and its metadata back into a [`FrameStack`].
pub fn read_stack(path: impl AsRef<Path>) -> Result<(FrameStack, StackMeta)> {
    let path = path.as_ref();
    let raw = read_raw_stack(path)?;
    let mp = meta_path(path);
    let text = std::fs::read_to_string(&mp).map_err(|e| Error::io(&mp, e))?;
    let meta = StackMeta::parse(&text, &mp.display().to_string())?;
    let stack = assemble(raw, &meta);
    Ok((stack, meta))
}

/// Geometry and counts from the binary, everything else from the metadata.
pub fn assemble(raw: RawStack, meta: &StackMeta) -> FrameStack {
    let mut camera = meta.config.camera(meta.mode);
    camera.width = raw.width;
    camera.height = raw.height;
    camera.pixel_pitch = raw.pixel_pitch;
    camera.origin_offset = raw.origin_offset;
    FrameStack {
        camera,
        scan: PhaseScan {
            phases: raw.phases,
            jitter_sigma: meta.config.scan.jitter_sigma,
        },
        frames: raw.counts.into_iter().map(u32::from).collect(),
        seed: raw.seed,
        scene: meta.config.scene(meta.mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{simulate_stack, CameraSpec, SceneSpec};

    fn small_stack(mean: f64) -> (FrameStack, RunConfig) {
        let mut cfg = RunConfig::default();
        cfg.camera.width = 9;
        cfg.camera.height = 8;
        cfg.camera.mean_counts = mean;
        cfg.scan.frames = 12;
        let stack = simulate_stack(
            &cfg.scene(Mode::FarField),
            &cfg.camera(Mode::FarField),
            &cfg.phase_scan(),
            5,
        )
        .unwrap();
        (stack, cfg)
    }

    #[test]
    fn header_layout() {
        let (stack, _) = small_stack(50.0);
        let (bytes, sat) = encode_stack(&stack);
        assert_eq!(sat, 0);
        assert_eq!(&bytes[..4], b"ICFS");
        assert_eq!(u32_at(&bytes, 8), 9);
        assert_eq!(u32_at(&bytes, 12), 8);
        assert_eq!(u32_at(&bytes, 16), 12);
        assert_eq!(u64_at(&bytes, 36), 5);
        assert_eq!(bytes.len(), HEADER_LEN + 12 * 8 + 9 * 8 * 12 * 2);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.icfs");
        let (stack, cfg) = small_stack(50.0);
        write_stack(&path, &stack, &cfg).unwrap();
        let (back, meta) = read_stack(&path).unwrap();
        assert_eq!(back, stack);
        assert_eq!(meta.config, cfg);
        assert_eq!(meta.saturated, 0);
    }

    #[test]
    fn saturation_recorded() {
        let camera = CameraSpec::centered(8, 1e-5, 1e5);
        let mut scan = PhaseScan::uniform(8, 1.0);
        scan.jitter_sigma = 0.0;
        let stack = simulate_stack(&SceneSpec::new(Mode::FarField, Default::default()), &camera, &scan, 1).unwrap();
        let (bytes, sat) = encode_stack(&stack);
        assert_eq!(sat as usize, stack.frames.len());
        let raw = decode_stack(&bytes).unwrap();
        assert!(raw.counts.iter().all(|&c| c == u16::MAX));
    }

    fn offset_of(e: Error) -> u64 {
        match e {
            Error::CorruptStack { offset, .. } => offset,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn corruption_names_offset() {
        let (stack, _) = small_stack(50.0);
        let (bytes, _) = encode_stack(&stack);
        assert_eq!(offset_of(decode_stack(&bytes[..10]).unwrap_err()), 10);
        let n = bytes.len();
        assert_eq!(offset_of(decode_stack(&bytes[..n - 1]).unwrap_err()), (n - 1) as u64);
        let mut extra = bytes.clone();
        extra.push(0);
        assert_eq!(offset_of(decode_stack(&extra).unwrap_err()), n as u64);
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(offset_of(decode_stack(&bad).unwrap_err()), 0);
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert_eq!(offset_of(decode_stack(&bad).unwrap_err()), 4);
        let mut bad = bytes.clone();
        bad[HEADER_LEN + 8 * 3..HEADER_LEN + 8 * 4].copy_from_slice(&f64::NAN.to_le_bytes());
        assert_eq!(offset_of(decode_stack(&bad).unwrap_err()), (HEADER_LEN + 24) as u64);
    }

    #[test]
    fn meta_round_trip_and_errors() {
        let meta = StackMeta {
            config: RunConfig::default(),
            mode: Mode::NearField,
            saturated: 17,
        };
        assert_eq!(StackMeta::parse(&meta.render(), "m").unwrap(), meta);
        let bad = meta.render().replace("camera.width = 128", "camera.wdth = 128");
        match StackMeta::parse(&bad, "m").unwrap_err() {
            Error::ConfigParse { key, line, .. } => {
                assert_eq!(key, "camera.wdth");
                let expected = bad.lines().position(|l| l.starts_with("camera.wdth")).unwrap() + 1;
                assert_eq!(line, expected);
            }
            other => panic!("{other:?}"),
        }
    }
}

//! Run configuration, the stack container and report formats.

pub mod config;
pub mod reports;
pub mod stack;

pub use config::{CameraConfig, ReportConfig, RunConfig, ScanConfig};
pub use reports::{
    parse_visibility_csv, read_json, read_visibility, render_visibility_csv, write_entanglement_report, write_json,
    write_visibility, EsfReport, VisibilityMeta, ESF_SCHEMA, VISIBILITY_HEADER,
};
pub use stack::{
    decode_stack, encode_stack, meta_path, read_raw_stack, read_stack, write_stack, RawStack, StackMeta, MAGIC,
    VERSION,
};

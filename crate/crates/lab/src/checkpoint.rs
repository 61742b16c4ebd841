//! Versioned binary checkpoints: a JSON header describing the layout,
//! followed by the raw spectral coefficients as little-endian f64 pairs.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use csmlab_core::field::SpectralField;
use csmlab_core::flow::SimState;
use csmlab_core::{VelocityField, WavenumberGrid, DIVERGENCE_TOL};

use crate::error::{LabError, Result};

pub const MAGIC: &[u8; 8] = b"CSMLCKPT";
pub const VERSION: u32 = 1;
pub const LAYOUT: &str = "components x then y; per component n*n complex coefficients, \
row-major with the y mode outer; FFT slot order m = 0..n/2-1, -n/2..-1; \
each coefficient stored as little-endian f64 (re, im)";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub version: u32,
    pub config_digest: String,
    pub t: f64,
    pub step_index: u64,
    pub n: usize,
    pub length: f64,
    pub layout: String,
}

pub fn save_checkpoint(path: &Path, state: &SimState, config_digest: &str) -> Result<()> {
    let grid = state.velocity.grid();
    let header = CheckpointHeader {
        version: VERSION,
        config_digest: config_digest.to_string(),
        t: state.t,
        step_index: state.step_index,
        n: grid.n(),
        length: grid.length(),
        layout: LAYOUT.to_string(),
    };
    let header_json = serde_json::to_vec(&header)
        .map_err(|e| LabError::Validation(format!("checkpoint header: {e}")))?;
    let payload_len = 2 * grid.len() * 16;
    let mut buf = Vec::with_capacity(8 + 4 + 8 + header_json.len() + payload_len);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
    buf.extend_from_slice(&header_json);
    for field in [&state.velocity.x, &state.velocity.y] {
        for c in field.coeffs() {
            buf.extend_from_slice(&c.re.to_le_bytes());
            buf.extend_from_slice(&c.im.to_le_bytes());
        }
    }
    fs::write(path, buf).map_err(|e| LabError::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(SimState, CheckpointHeader)> {
    let bytes = fs::read(path).map_err(|e| LabError::io(path, e))?;
    let bail = |msg: String| LabError::Validation(format!("{}: {msg}", path.display()));
    if bytes.len() < 20 || &bytes[0..8] != MAGIC {
        return Err(bail("not a checkpoint file (bad magic)".into()));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(bail(format!("unsupported checkpoint version {version}")));
    }
    let header_len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    let header_end = 20 + header_len;
    if bytes.len() < header_end {
        return Err(bail(format!("truncated header at offset {}", bytes.len())));
    }
    let header: CheckpointHeader = serde_json::from_slice(&bytes[20..header_end])
        .map_err(|e| bail(format!("header: {e}")))?;
    let grid = WavenumberGrid::new(header.n, header.length)?;
    let expect = header_end + 2 * grid.len() * 16;
    if bytes.len() != expect {
        return Err(bail(format!(
            "payload length mismatch: expected {expect} bytes, found {} (truncated at offset {})",
            bytes.len(),
            bytes.len()
        )));
    }
    let mut fields = Vec::with_capacity(2);
    let mut off = header_end;
    for _ in 0..2 {
        let mut coeffs = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            let re = f64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
            let im = f64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap());
            coeffs.push(Complex64::new(re, im));
            off += 16;
        }
        fields.push(SpectralField::from_coeffs(grid.clone(), coeffs)?);
    }
    let y = fields.pop().unwrap();
    let x = fields.pop().unwrap();
    let velocity = VelocityField::new(x, y)?;
    let amp = velocity.max_mode_amplitude();
    if velocity.divergence_max() > DIVERGENCE_TOL * amp.max(1e-300) {
        return Err(bail(format!(
            "stored field violates the divergence-free invariant (residual {:.3e}, amplitude {:.3e})",
            velocity.divergence_max(),
            amp
        )));
    }
    let state = SimState { t: header.t, step_index: header.step_index, velocity };
    Ok((state, header))
}

/// Resolve a checkpoint into a fresh initial state on the expected grid.
pub fn initial_state_from_checkpoint(
    path: &Path,
    expected: &Arc<WavenumberGrid>,
) -> Result<SimState> {
    let (state, header) = load_checkpoint(path)?;
    if header.n != expected.n() || header.length != expected.length() {
        return Err(LabError::Validation(format!(
            "{}: checkpoint grid n={} length={} does not match config n={} length={}",
            path.display(),
            header.n,
            header.length,
            expected.n(),
            expected.length()
        )));
    }
    // the stored field becomes the t = 0 initial condition of the new run
    Ok(SimState::initial(state.velocity))
}

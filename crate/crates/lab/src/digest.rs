//! Canonical-form digests for configuration documents.
//!
//! Canonical form: JSON with sorted keys, no insignificant whitespace, and
//! floats in shortest round-trip decimal. serde_json provides all three
//! (maps are ordered, numbers go through ryu), so canonicalization is
//! value-parse plus compact re-serialization.

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{LabError, Result};

pub fn canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)
        .map_err(|e| LabError::Validation(format!("cannot canonicalize config: {e}")))?;
    serde_json::to_string(&v).map_err(|e| LabError::Validation(format!("cannot serialize config: {e}")))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Digest of the canonical form; stable under key reordering of the source
/// document because parsing into a JSON value sorts object keys.
pub fn config_digest<T: Serialize>(value: &T) -> Result<String> {
    Ok(sha256_hex(canonical_json(value)?.as_bytes()))
}

//! Digest of everything a run reads, for reproducibility records.

use serde_json::Value as Json;
use sha2::{Digest as _, Sha256};

pub struct Digest(Sha256);

impl Digest {
    pub fn new() -> Self {
        Self(Sha256::new())
    }

    /// Adds a length-prefixed chunk so chunk boundaries are unambiguous.
    pub fn add_bytes(&mut self, bytes: &[u8]) {
        self.0.update((bytes.len() as u64).to_le_bytes());
        self.0.update(bytes);
    }

    pub fn add_json(&mut self, value: &Json) {
        self.add_bytes(value.to_string().as_bytes());
    }

    pub fn finish(self) -> String {
        format!("sha256:{}", hex::encode(self.0.finalize()))
    }
}

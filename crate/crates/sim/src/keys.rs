//! Deterministic key material for simulation runs.
//!
//! Every signing key is derived from the scenario seed, so a run never
//! touches an entropy source and replays bit-for-bit.

use pcimkit_core::attestation::SigningKey;
use sha2::{Digest as _, Sha256};

fn derive_key(context: &str, seed: u64, a: u64, b: u64) -> SigningKey {
    let mut hasher = Sha256::new();
    hasher.update(b"pcimkit-sim key v1\0");
    hasher.update(context.as_bytes());
    hasher.update([0u8]);
    hasher.update(seed.to_le_bytes());
    hasher.update(a.to_le_bytes());
    hasher.update(b.to_le_bytes());
    SigningKey::from_bytes(&hasher.finalize().into())
}

/// Signing key of guardian `index` in generated set `set_id`.
pub fn guardian_key(seed: u64, set_id: u32, index: u8) -> SigningKey {
    derive_key("guardian", seed, u64::from(set_id), u64::from(index))
}

/// Signing key behind a named signature-receipt verification key.
pub fn receipt_key(seed: u64, vk_name: &str) -> SigningKey {
    let mut hasher = Sha256::new();
    hasher.update(vk_name.as_bytes());
    let name_code = u64::from_le_bytes(hasher.finalize()[..8].try_into().unwrap());
    derive_key("receipt", seed, name_code, 0)
}

/// A key that belongs to no guardian set; what a forger signs with.
pub fn outsider_key(seed: u64, index: u64) -> SigningKey {
    derive_key("outsider", seed, index, 0)
}

//! The verifier router: one application-facing
//! `verify(proof, public_values, vk_id)` dispatching to pluggable
//! backends through a verification-key registry.
//!
//! Two mock backends stand in for real proof systems while preserving the
//! routing semantics:
//!
//! - `signature_receipt` — the proof is an Ed25519 signature by a
//!   registered prover key over the (vk_id, public_values) digest. Small
//!   proof, trusted key: the stand-in for succinct receipt verification.
//! - `transparent_reexec` — the proof is a length-prefixed witness that
//!   the router re-executes against the registered relation. No keys,
//!   large proof: the stand-in for transparent verification.
//!
//! A vk_id is the content hash of its registry entry
//! (`hash("vkid", encode((kind, relation, key material)))`), so an entry
//! cannot be swapped without every holder of the id noticing.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;
use core::str::FromStr;

use ed25519_dalek::{Signature, VerifyingKey};

use crate::encoding::{tags, Decode, DecodeError, Decoder, Encode, EncodeError, Encoder, ParamBundle};
use crate::hashing::{encode_for_hash, hash, Digest, DomainTag};
use crate::relations::{RelationId, RelationRegistry};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BackendKind {
    SignatureReceipt,
    TransparentReexec,
}

impl BackendKind {
    /// Stable code used inside vk_id preimages.
    pub fn code(&self) -> u32 {
        match self {
            BackendKind::SignatureReceipt => 1,
            BackendKind::TransparentReexec => 2,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BackendKind::SignatureReceipt => "signature_receipt",
            BackendKind::TransparentReexec => "transparent_reexec",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownBackendKind;

impl FromStr for BackendKind {
    type Err = UnknownBackendKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "signature_receipt" => Ok(BackendKind::SignatureReceipt),
            "transparent_reexec" => Ok(BackendKind::TransparentReexec),
            _ => Err(UnknownBackendKind),
        }
    }
}

/// Self-describing verification-key id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct VkId(pub Digest);

impl fmt::Display for VkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Encode for VkId {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_fixed(tags::VK_ID, &self.0 .0);
        Ok(())
    }
}

impl Decode for VkId {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(VkId(Digest(dec.get_fixed(tags::VK_ID)?)))
    }
}

/// Derive a vk_id from the registry entry contents.
pub fn derive_vk_id(kind: BackendKind, relation_id: RelationId, key_material: &[u8]) -> VkId {
    let payload = encode_for_hash(&(kind.code(), relation_id.0, key_material.to_vec()));
    VkId(hash(DomainTag::VkId, payload.as_slice()))
}

/// A proof routed through the verifier interface. The payload grammar is
/// fixed per backend: raw signature octets for `signature_receipt`,
/// length-prefixed witness octets for `transparent_reexec`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Proof {
    pub backend_kind: BackendKind,
    pub payload: Vec<u8>,
}

impl Proof {
    /// Wrap a witness in the transparent payload grammar.
    pub fn transparent(witness: &[u8]) -> Proof {
        let mut payload = Vec::with_capacity(4 + witness.len());
        payload.extend_from_slice(&(witness.len() as u32).to_le_bytes());
        payload.extend_from_slice(witness);
        Proof { backend_kind: BackendKind::TransparentReexec, payload }
    }

    pub fn receipt(signature: &Signature) -> Proof {
        Proof {
            backend_kind: BackendKind::SignatureReceipt,
            payload: signature.to_bytes().to_vec(),
        }
    }
}

/// Digest a receipt backend signs: binds the proof to both the vk and the
/// exact public values.
pub fn receipt_digest(vk_id: &VkId, public_values: &ParamBundle) -> Digest {
    let payload = encode_for_hash(&(*vk_id, public_values.clone()));
    hash(DomainTag::Attest, payload.as_slice())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouterError {
    /// vk_id not registered, or its entry no longer matches the id.
    UnknownVk,
    /// Proof's backend kind differs from the registered entry's.
    BackendMismatch,
    /// Payload does not parse under the backend's grammar.
    MalformedProof,
    /// Relation id missing from the relation registry.
    UnknownRelation,
    /// Registered key material does not parse as a verification key.
    MalformedKey,
}

impl fmt::Display for RouterError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RouterError::UnknownVk => write!(f, "vk_id not registered"),
            RouterError::BackendMismatch => write!(f, "proof backend does not match vk entry"),
            RouterError::MalformedProof => write!(f, "proof payload does not parse"),
            RouterError::UnknownRelation => write!(f, "relation not registered"),
            RouterError::MalformedKey => write!(f, "key material is not a valid key"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VkEntry {
    pub vk_id: VkId,
    pub kind: BackendKind,
    pub relation_id: RelationId,
    pub key_material: Vec<u8>,
}

impl VkEntry {
    fn recomputed_id(&self) -> VkId {
        derive_vk_id(self.kind, self.relation_id, &self.key_material)
    }
}

/// Verification-key registry; append-only during setup, read-only during
/// runs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RouterRegistry {
    entries: BTreeMap<VkId, VkEntry>,
}

impl RouterRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rebuild a registry from raw entries (registry dump ingestion).
    /// Integrity is not assumed; call [`RouterRegistry::check_integrity`].
    pub fn from_entries(entries: Vec<VkEntry>) -> Self {
        RouterRegistry {
            entries: entries.into_iter().map(|e| (e.vk_id, e)).collect(),
        }
    }

    /// Register key material for a relation under a backend. The returned
    /// vk_id is the content hash of the entry.
    pub fn register_vk(
        &mut self,
        kind: BackendKind,
        relation_id: RelationId,
        key_material: Vec<u8>,
        relations: &RelationRegistry,
    ) -> Result<VkId, RouterError> {
        if !relations.contains(relation_id) {
            return Err(RouterError::UnknownRelation);
        }
        if kind == BackendKind::SignatureReceipt {
            parse_verifying_key(&key_material)?;
        }
        let vk_id = derive_vk_id(kind, relation_id, &key_material);
        self.entries.insert(vk_id, VkEntry { vk_id, kind, relation_id, key_material });
        Ok(vk_id)
    }

    pub fn entry(&self, vk_id: &VkId) -> Option<&VkEntry> {
        self.entries.get(vk_id)
    }

    /// Every entry's digest must match the id it is filed under.
    pub fn check_integrity(&self) -> Result<(), RouterError> {
        for (vk_id, entry) in &self.entries {
            if entry.recomputed_id() != *vk_id || entry.vk_id != *vk_id {
                return Err(RouterError::UnknownVk);
            }
        }
        Ok(())
    }

    /// The single application-facing verification entry point.
    pub fn verify(
        &self,
        proof: &Proof,
        public_values: &ParamBundle,
        vk_id: &VkId,
        relations: &RelationRegistry,
    ) -> Result<bool, RouterError> {
        let entry = self.entries.get(vk_id).ok_or(RouterError::UnknownVk)?;
        // A tampered entry no longer describes the id it is filed under;
        // treat it the same as an unregistered key.
        if entry.recomputed_id() != *vk_id {
            return Err(RouterError::UnknownVk);
        }
        if proof.backend_kind != entry.kind {
            return Err(RouterError::BackendMismatch);
        }
        match entry.kind {
            BackendKind::SignatureReceipt => {
                let key = parse_verifying_key(&entry.key_material)?;
                let signature =
                    Signature::from_slice(&proof.payload).map_err(|_| RouterError::MalformedProof)?;
                let digest = receipt_digest(vk_id, public_values);
                Ok(key.verify_strict(digest.as_bytes(), &signature).is_ok())
            }
            BackendKind::TransparentReexec => {
                let witness = parse_witness_payload(&proof.payload)?;
                let relation = relations
                    .get(entry.relation_id)
                    .map_err(|_| RouterError::UnknownRelation)?;
                Ok(relation.check(public_values, witness))
            }
        }
    }

    /// Deterministic listing, ordered by vk_id bytes.
    pub fn route_table(&self) -> Vec<(VkId, BackendKind, RelationId)> {
        self.entries
            .values()
            .map(|e| (e.vk_id, e.kind, e.relation_id))
            .collect()
    }

    /// Registry dump: one line per entry,
    /// `hex(vk_id) kind relation_id hex(key_material)`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for entry in self.entries.values() {
            let _ = write!(out, "{} {} {} ", entry.vk_id, entry.kind, entry.relation_id);
            for byte in &entry.key_material {
                let _ = write!(out, "{byte:02x}");
            }
            out.push('\n');
        }
        out
    }
}

fn parse_verifying_key(key_material: &[u8]) -> Result<VerifyingKey, RouterError> {
    let bytes: [u8; 32] = key_material.try_into().map_err(|_| RouterError::MalformedKey)?;
    VerifyingKey::from_bytes(&bytes).map_err(|_| RouterError::MalformedKey)
}

fn parse_witness_payload(payload: &[u8]) -> Result<&[u8], RouterError> {
    if payload.len() < 4 {
        return Err(RouterError::MalformedProof);
    }
    let (len_bytes, witness) = payload.split_at(4);
    let declared = u32::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
    if witness.len() != declared {
        return Err(RouterError::MalformedProof);
    }
    Ok(witness)
}

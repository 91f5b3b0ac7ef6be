//! Domain-separated hashing, identifier derivation, and the binding
//! commitment scheme.
//!
//! The hash function is SHA-256. Every call is domain-separated by one of
//! the six registered tags, so digests from different roles (identifiers,
//! commitments, nullifiers, attestation payloads, verification-key ids,
//! tree/block roots) can never collide with each other:
//!
//! ```text
//! hash(tag, payload) = SHA-256( u32_le(len(tag)) || tag_ascii || payload )
//! ```
//!
//! The commitment is a salted hash over canonical parameter bytes. Binding
//! comes from collision resistance; the 32-octet nonce adds hiding, which
//! the secret-carrying inbox flow relies on.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use sha2::{Digest as _, Sha256};

use crate::encoding::{
    encode, tags, CanonicalBytes, Decode, DecodeError, Decoder, Encode, EncodeError, Encoder,
    ParamBundle,
};

/// Fixed 32-octet hash output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub const ZERO: Digest = Digest([0u8; 32]);

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for byte in self.0 {
            write!(f, "{byte:02x}")?;
        }
        Ok(())
    }
}

impl Encode for Digest {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_fixed(tags::DIGEST, &self.0);
        Ok(())
    }
}

impl Decode for Digest {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Digest(dec.get_fixed(tags::DIGEST)?))
    }
}

/// The six registered domain-separation tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DomainTag {
    Ident,
    Commit,
    Nullifier,
    Attest,
    VkId,
    Root,
}

impl DomainTag {
    pub const ALL: [DomainTag; 6] = [
        DomainTag::Ident,
        DomainTag::Commit,
        DomainTag::Nullifier,
        DomainTag::Attest,
        DomainTag::VkId,
        DomainTag::Root,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            DomainTag::Ident => "ident",
            DomainTag::Commit => "commit",
            DomainTag::Nullifier => "nullifier",
            DomainTag::Attest => "attest",
            DomainTag::VkId => "vkid",
            DomainTag::Root => "root",
        }
    }
}

/// A string is not one of the registered domain tags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownDomainTag;

impl fmt::Display for UnknownDomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown domain tag")
    }
}

impl FromStr for DomainTag {
    type Err = UnknownDomainTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DomainTag::ALL
            .into_iter()
            .find(|tag| tag.as_str() == s)
            .ok_or(UnknownDomainTag)
    }
}

/// Domain-separated SHA-256 over an arbitrary payload.
pub fn hash(tag: DomainTag, payload: &[u8]) -> Digest {
    let tag_bytes = tag.as_str().as_bytes();
    let mut hasher = Sha256::new();
    hasher.update((tag_bytes.len() as u32).to_le_bytes());
    hasher.update(tag_bytes);
    hasher.update(payload);
    Digest(hasher.finalize().into())
}

/// Encode a value whose size is known to be far below the 2^32 length cap.
///
/// All in-protocol values (messages, bundles, commands) are kilobytes at
/// most; an overflow here means the caller fed multi-gigabyte data, which
/// is outside the protocol's domain.
pub(crate) fn encode_for_hash<T: Encode + ?Sized>(value: &T) -> CanonicalBytes {
    encode(value).expect("value exceeds the 2^32-octet encoding cap")
}

/// Single-use message identifier, derived from (domain, sender, sequence).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Identifier(pub Digest);

impl fmt::Display for Identifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Encode for Identifier {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_fixed(tags::IDENTIFIER, &self.0 .0);
        Ok(())
    }
}

impl Decode for Identifier {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Identifier(Digest(dec.get_fixed(tags::IDENTIFIER)?)))
    }
}

/// Derive the replay identifier for a (domain, sender, sequence) triple.
///
/// Deterministic; distinct triples produce distinct identifiers except
/// with hash-collision probability.
pub fn derive_identifier(domain_id: u32, sender: &[u8], sequence: u64) -> Identifier {
    let payload = encode_for_hash(&(domain_id, sender.to_vec(), sequence));
    Identifier(hash(DomainTag::Ident, payload.as_slice()))
}

/// Commitment salt. Caller-supplied so runs stay deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Nonce(pub [u8; 32]);

impl Nonce {
    pub const ZERO: Nonce = Nonce([0u8; 32]);
}

/// Binding commitment to a parameter bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Commitment(pub Digest);

impl fmt::Display for Commitment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Encode for Commitment {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_fixed(tags::COMMITMENT, &self.0 .0);
        Ok(())
    }
}

impl Decode for Commitment {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Commitment(Digest(dec.get_fixed(tags::COMMITMENT)?)))
    }
}

/// Commit to a parameter bundle under a 32-octet nonce:
/// `hash("commit", nonce || encode(params))`.
pub fn commit(params: &ParamBundle, nonce: &Nonce) -> Commitment {
    let encoded = encode_for_hash(params);
    let mut payload = Vec::with_capacity(32 + encoded.len());
    payload.extend_from_slice(&nonce.0);
    payload.extend_from_slice(encoded.as_slice());
    Commitment(hash(DomainTag::Commit, &payload))
}

/// Witness for a commitment: the nonce and the committed parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub nonce: Nonce,
    pub params: ParamBundle,
}

/// True iff the opening reproduces the commitment.
pub fn verify_opening(commitment: &Commitment, opening: &Opening) -> bool {
    commit(&opening.params, &opening.nonce) == *commitment
}

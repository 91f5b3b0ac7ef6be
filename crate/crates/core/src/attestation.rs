//! Origin authenticity via a t-of-n guardian signature quorum.
//!
//! A guardian set is an ordered committee of Ed25519 verification keys
//! with an explicit threshold. An attestation over canonical message
//! bytes verifies when at least `threshold` signatures check out against
//! distinct member keys, all over the same domain-separated digest.
//! Ed25519 was chosen as the EUF-CMA scheme; nothing else in the protocol
//! depends on the particular signature algorithm.

use alloc::vec::Vec;
use core::fmt;

pub use ed25519_dalek::{Signature, Signer, SigningKey, Verifier, VerifyingKey};

use crate::encoding::CanonicalBytes;
use crate::hashing::{hash, Digest, DomainTag};

/// Ordered signer committee with a quorum threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardianSet {
    set_id: u32,
    members: Vec<VerifyingKey>,
    threshold: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardianSetError {
    /// Threshold must satisfy 1 <= threshold <= member count <= 255.
    ThresholdOutOfRange,
    /// Member keys must be pairwise distinct.
    DuplicateMember,
}

impl fmt::Display for GuardianSetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardianSetError::ThresholdOutOfRange => {
                write!(f, "threshold outside 1..=member count (max 255)")
            }
            GuardianSetError::DuplicateMember => write!(f, "duplicate member key"),
        }
    }
}

impl GuardianSet {
    pub fn new(
        set_id: u32,
        members: Vec<VerifyingKey>,
        threshold: u8,
    ) -> Result<Self, GuardianSetError> {
        if members.is_empty() || members.len() > 255 {
            return Err(GuardianSetError::ThresholdOutOfRange);
        }
        if threshold == 0 || usize::from(threshold) > members.len() {
            return Err(GuardianSetError::ThresholdOutOfRange);
        }
        for (i, key) in members.iter().enumerate() {
            if members[..i].contains(key) {
                return Err(GuardianSetError::DuplicateMember);
            }
        }
        Ok(GuardianSet { set_id, members, threshold })
    }

    /// Quorum used for generated sets: floor(2n/3) + 1.
    pub fn default_threshold(member_count: usize) -> u8 {
        ((2 * member_count) / 3 + 1) as u8
    }

    pub fn set_id(&self) -> u32 {
        self.set_id
    }

    pub fn members(&self) -> &[VerifyingKey] {
        &self.members
    }

    pub fn threshold(&self) -> u8 {
        self.threshold
    }
}

/// Threshold signature bundle over one message digest.
///
/// Member indices are strictly increasing, so the quorum count is
/// auditable without touching any cryptography. Fields are public: an
/// attestation is a wire artifact and adversaries may construct or
/// mutate one freely; `verify_attestation` is the judge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attestation {
    pub set_id: u32,
    pub signatures: Vec<(u8, Signature)>,
    pub signed_digest: Digest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttestError {
    /// Fewer than `threshold` distinct member indices supplied.
    InsufficientSigners,
    /// Attestation's set_id does not match the verifying set.
    SetMismatch,
}

impl fmt::Display for AttestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttestError::InsufficientSigners => write!(f, "fewer signers than threshold"),
            AttestError::SetMismatch => write!(f, "attestation set_id mismatch"),
        }
    }
}

/// Sign `hash("attest", message_bytes)` with each supplied key at its
/// claimed member index.
///
/// Keys are used as given; whether a key actually belongs at its claimed
/// index is decided at verification time, never here. Duplicate indices
/// collapse to the first occurrence.
pub fn attest(
    set: &GuardianSet,
    signers: &[(u8, &SigningKey)],
    message_bytes: &CanonicalBytes,
) -> Result<Attestation, AttestError> {
    let digest = hash(DomainTag::Attest, message_bytes.as_slice());

    let mut entries: Vec<(u8, &SigningKey)> = Vec::new();
    for &(index, key) in signers {
        if !entries.iter().any(|(i, _)| *i == index) {
            entries.push((index, key));
        }
    }
    entries.sort_by_key(|(i, _)| *i);

    if entries.len() < usize::from(set.threshold) {
        return Err(AttestError::InsufficientSigners);
    }

    let signatures = entries
        .into_iter()
        .map(|(index, key)| (index, key.sign(digest.as_bytes())))
        .collect();

    Ok(Attestation { set_id: set.set_id, signatures, signed_digest: digest })
}

/// True iff at least `threshold` signatures verify against distinct
/// member keys over `hash("attest", message_bytes)`.
///
/// Structural defects (wrong signed digest, non-increasing indices) are
/// rejected before any signature check. A `set_id` mismatch is an error,
/// not a verdict: the caller consulted the wrong set.
pub fn verify_attestation(
    set: &GuardianSet,
    message_bytes: &CanonicalBytes,
    attestation: &Attestation,
) -> Result<bool, AttestError> {
    if attestation.set_id != set.set_id {
        return Err(AttestError::SetMismatch);
    }

    let digest = hash(DomainTag::Attest, message_bytes.as_slice());
    if attestation.signed_digest != digest {
        return Ok(false);
    }

    let indices: Vec<u8> = attestation.signatures.iter().map(|(i, _)| *i).collect();
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Ok(false);
    }

    let mut valid = 0usize;
    for (index, signature) in &attestation.signatures {
        let Some(key) = set.members.get(usize::from(*index)) else {
            continue;
        };
        if key.verify_strict(digest.as_bytes(), signature).is_ok() {
            valid += 1;
        }
    }
    Ok(valid >= usize::from(set.threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::encode;

    fn signing_key(byte: u8) -> SigningKey {
        SigningKey::from_bytes(&[byte; 32])
    }

    fn three_member_set() -> (GuardianSet, Vec<SigningKey>) {
        let keys: Vec<SigningKey> = (1..=3).map(signing_key).collect();
        let members = keys.iter().map(|k| k.verifying_key()).collect();
        let set = GuardianSet::new(9, members, 2).unwrap();
        (set, keys)
    }

    fn message() -> CanonicalBytes {
        encode(&(1u32, b"payload".to_vec())).unwrap()
    }

    #[test]
    fn quorum_of_two_verifies() {
        let (set, keys) = three_member_set();
        let att = attest(&set, &[(0, &keys[0]), (2, &keys[2])], &message()).unwrap();
        assert_eq!(att.signatures.len(), 2);
        assert!(verify_attestation(&set, &message(), &att).unwrap());
    }

    #[test]
    fn single_signer_below_threshold() {
        let (set, keys) = three_member_set();
        let err = attest(&set, &[(1, &keys[1])], &message()).unwrap_err();
        assert_eq!(err, AttestError::InsufficientSigners);
    }

    #[test]
    fn full_committee_verifies() {
        let (set, keys) = three_member_set();
        let signers: Vec<(u8, &SigningKey)> =
            keys.iter().enumerate().map(|(i, k)| (i as u8, k)).collect();
        let att = attest(&set, &signers, &message()).unwrap();
        assert_eq!(att.signatures.len(), 3);
        assert!(verify_attestation(&set, &message(), &att).unwrap());
    }

    #[test]
    fn different_message_fails() {
        let (set, keys) = three_member_set();
        let att = attest(&set, &[(0, &keys[0]), (1, &keys[1])], &message()).unwrap();
        let other = encode(&(2u32, b"other".to_vec())).unwrap();
        assert!(!verify_attestation(&set, &other, &att).unwrap());
    }

    #[test]
    fn non_member_key_does_not_count() {
        let (set, keys) = three_member_set();
        let outsider = signing_key(99);
        let att = attest(&set, &[(0, &keys[0]), (1, &outsider)], &message()).unwrap();
        assert!(!verify_attestation(&set, &message(), &att).unwrap());
    }

    #[test]
    fn duplicate_indices_rejected_structurally() {
        let (set, keys) = three_member_set();
        let mut att = attest(&set, &[(0, &keys[0]), (1, &keys[1])], &message()).unwrap();
        let dup = att.signatures[0];
        att.signatures.push(dup);
        assert!(!verify_attestation(&set, &message(), &att).unwrap());
    }

    #[test]
    fn set_id_mismatch_is_an_error() {
        let (set, keys) = three_member_set();
        let att = attest(&set, &[(0, &keys[0]), (1, &keys[1])], &message()).unwrap();
        let other_set =
            GuardianSet::new(10, set.members().to_vec(), set.threshold()).unwrap();
        assert_eq!(
            verify_attestation(&other_set, &message(), &att),
            Err(AttestError::SetMismatch)
        );
    }

    #[test]
    fn invalid_guardian_sets_rejected() {
        let keys: Vec<VerifyingKey> =
            (1..=3).map(|b| signing_key(b).verifying_key()).collect();
        assert_eq!(
            GuardianSet::new(0, keys.clone(), 0).unwrap_err(),
            GuardianSetError::ThresholdOutOfRange
        );
        assert_eq!(
            GuardianSet::new(0, keys.clone(), 4).unwrap_err(),
            GuardianSetError::ThresholdOutOfRange
        );
        let mut dup = keys.clone();
        dup.push(keys[0]);
        assert_eq!(
            GuardianSet::new(0, dup, 2).unwrap_err(),
            GuardianSetError::DuplicateMember
        );
    }

    #[test]
    fn default_threshold_is_two_thirds_plus_one() {
        assert_eq!(GuardianSet::default_threshold(3), 3);
        assert_eq!(GuardianSet::default_threshold(7), 5);
        assert_eq!(GuardianSet::default_threshold(19), 13);
    }
}

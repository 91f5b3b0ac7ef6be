//! Private consumption: secret-gated entries, nullifiers, and receipts.
//!
//! An accepted interchain message whose relation is the inbox-injection
//! relation deposits an entry here: an identifier, a commitment over
//! (secret || public params), and the public params themselves. Whoever
//! knows the secret consumes the entry exactly once; the nullifier
//! derived from (identifier, secret) marks it spent. The same secret
//! used under different identifiers yields unlinkable nullifiers.
//!
//! Transcripts disclose only the entry's public params — never the
//! secret, the nonce, or anything derived from them besides the
//! nullifier digest.

use alloc::collections::{BTreeMap, BTreeSet};
use core::fmt;

use ed25519_dalek::{Signer, SigningKey};

use crate::encoding::{
    tags, Decode, DecodeError, Decoder, Encode, EncodeError, Encoder, ParamBundle,
};
use crate::hashing::{commit, encode_for_hash, hash, Commitment, Digest, DomainTag, Identifier, Nonce};
use crate::relations::Relation;
use crate::router::{receipt_digest, BackendKind, Proof, RouterRegistry, VkId};

/// Reserved label for the secret inside a commitment bundle. Entry
/// public params must not use it.
pub const SECRET_LABEL: &str = "secret";

/// Label for a secret commitment inside injection public values.
pub const SECRET_COMMITMENT_LABEL: &str = "sc";

/// Single-use consumption marker: `hash("nullifier", (identifier, secret))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Nullifier(pub Digest);

impl fmt::Display for Nullifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Encode for Nullifier {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_fixed(tags::NULLIFIER, &self.0 .0);
        Ok(())
    }
}

impl Decode for Nullifier {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(Nullifier(Digest(dec.get_fixed(tags::NULLIFIER)?)))
    }
}

pub fn derive_nullifier(identifier: &Identifier, secret: &[u8]) -> Nullifier {
    let payload = encode_for_hash(&(*identifier, secret.to_vec()));
    Nullifier(hash(DomainTag::Nullifier, payload.as_slice()))
}

/// Build the bundle a secret commitment covers: the secret first, then
/// the public params. Fails if the params already use the secret label.
pub fn secret_bundle(secret: &[u8], public_params: &ParamBundle) -> Result<ParamBundle, InboxError> {
    let mut bundle = ParamBundle::new();
    bundle
        .push(SECRET_LABEL, secret.to_vec())
        .expect("fresh bundle has no labels");
    for (label, value) in public_params.entries() {
        if label == SECRET_LABEL {
            return Err(InboxError::ReservedLabel);
        }
        bundle.set(label, value.clone());
    }
    Ok(bundle)
}

/// Commit to (secret || public params) under a nonce.
pub fn commit_secret(
    secret: &[u8],
    public_params: &ParamBundle,
    nonce: &Nonce,
) -> Result<Commitment, InboxError> {
    Ok(commit(&secret_bundle(secret, public_params)?, nonce))
}

/// A parameter-bound message waiting for its secret holder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InboxEntry {
    pub identifier: Identifier,
    pub secret_commitment: Commitment,
    pub public_params: ParamBundle,
}

/// What a consumption discloses: the identifier, the nullifier, and the
/// declared public outputs. Nothing in here is a function of the secret
/// other than the nullifier digest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsumptionTranscript {
    pub identifier: Identifier,
    pub nullifier: Nullifier,
    pub disclosed_outputs: ParamBundle,
}

impl Encode for ConsumptionTranscript {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_tag(tags::TRANSCRIPT);
        self.identifier.write(enc)?;
        self.nullifier.write(enc)?;
        self.disclosed_outputs.write(enc)
    }
}

impl Decode for ConsumptionTranscript {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        dec.expect_tag(tags::TRANSCRIPT)?;
        Ok(ConsumptionTranscript {
            identifier: Identifier::read(dec)?,
            nullifier: Nullifier::read(dec)?,
            disclosed_outputs: ParamBundle::read(dec)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InboxError {
    /// Identifier already has an entry.
    DuplicateEntry,
    /// No entry under this identifier.
    NotFound,
    /// Supplied secret/nonce do not open the entry's commitment.
    WrongSecret,
    /// Entry was already consumed (nullifier recorded).
    AlreadyConsumed,
    /// No usable signature-receipt key registered for receipts.
    NoReceiptKey,
    /// Public params use the reserved secret label or a non-UTF-8 label.
    ReservedLabel,
}

impl fmt::Display for InboxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InboxError::DuplicateEntry => write!(f, "identifier already present"),
            InboxError::NotFound => write!(f, "no entry for identifier"),
            InboxError::WrongSecret => write!(f, "secret does not open the commitment"),
            InboxError::AlreadyConsumed => write!(f, "entry already consumed"),
            InboxError::NoReceiptKey => write!(f, "no receipt key registered"),
            InboxError::ReservedLabel => write!(f, "public params use a reserved label"),
        }
    }
}

/// Entry store plus the nullifier set. Consumptions on one inbox are
/// serialized by the single &mut access path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Inbox {
    entries: BTreeMap<Identifier, InboxEntry>,
    nullifiers: BTreeSet<Nullifier>,
}

impl Inbox {
    pub fn new() -> Self {
        Self::default()
    }

    /// Store an entry. The caller is responsible for only injecting
    /// entries carried by accepted messages.
    pub fn inject(&mut self, entry: InboxEntry) -> Result<(), InboxError> {
        if entry.public_params.get(SECRET_LABEL).is_some() {
            return Err(InboxError::ReservedLabel);
        }
        if self.entries.contains_key(&entry.identifier) {
            return Err(InboxError::DuplicateEntry);
        }
        self.entries.insert(entry.identifier, entry);
        Ok(())
    }

    pub fn get(&self, identifier: &Identifier) -> Result<&InboxEntry, InboxError> {
        self.entries.get(identifier).ok_or(InboxError::NotFound)
    }

    pub fn is_consumed(&self, identifier: &Identifier, secret: &[u8]) -> bool {
        self.nullifiers.contains(&derive_nullifier(identifier, secret))
    }

    pub fn nullifier_count(&self) -> usize {
        self.nullifiers.len()
    }

    /// Consume an entry with its secret. The commitment gate runs first,
    /// so a wrong secret records nothing; a correct secret records the
    /// nullifier exactly once.
    pub fn consume(
        &mut self,
        identifier: &Identifier,
        secret: &[u8],
        nonce: &Nonce,
    ) -> Result<ConsumptionTranscript, InboxError> {
        let entry = self.entries.get(identifier).ok_or(InboxError::NotFound)?;
        let expected = commit_secret(secret, &entry.public_params, nonce)?;
        if expected != entry.secret_commitment {
            return Err(InboxError::WrongSecret);
        }
        let nullifier = derive_nullifier(identifier, secret);
        if self.nullifiers.contains(&nullifier) {
            return Err(InboxError::AlreadyConsumed);
        }
        self.nullifiers.insert(nullifier);
        Ok(ConsumptionTranscript {
            identifier: *identifier,
            nullifier,
            disclosed_outputs: entry.public_params.clone(),
        })
    }
}

/// Receipt public values: (identifier, nullifier, disclosed outputs).
pub fn receipt_public_values(transcript: &ConsumptionTranscript) -> ParamBundle {
    let mut pv = ParamBundle::new();
    pv.push("id", transcript.identifier.0 .0.to_vec())
        .expect("fresh bundle");
    pv.push("nf", transcript.nullifier.0 .0.to_vec())
        .expect("fresh bundle");
    pv.push("out", encode_for_hash(&transcript.disclosed_outputs).into_vec())
        .expect("fresh bundle");
    pv
}

/// Holder of the receipt signing key whose verification key is in the
/// router registry under `vk_id`.
pub struct ReceiptProver {
    pub vk_id: VkId,
    pub signing_key: SigningKey,
}

/// Summarize a consumption as a router-verifiable signature receipt.
pub fn export_receipt(
    transcript: &ConsumptionTranscript,
    prover: &ReceiptProver,
    router: &RouterRegistry,
) -> Result<(Proof, ParamBundle, VkId), InboxError> {
    let entry = router.entry(&prover.vk_id).ok_or(InboxError::NoReceiptKey)?;
    if entry.kind != BackendKind::SignatureReceipt
        || entry.key_material != prover.signing_key.verifying_key().to_bytes()
    {
        return Err(InboxError::NoReceiptKey);
    }
    let public_values = receipt_public_values(transcript);
    let digest = receipt_digest(&prover.vk_id, &public_values);
    let proof = Proof::receipt(&prover.signing_key.sign(digest.as_bytes()));
    Ok((proof, public_values, prover.vk_id))
}

/// Relation 3 by convention: inbox injection. Valid when the public
/// values carry a 32-octet secret commitment under "sc". The commitment
/// itself is opaque to the receiver; binding it into the accepted
/// parameters is the point.
#[derive(Debug, Clone, Copy, Default)]
pub struct InboxInjectionRelation;

impl Relation for InboxInjectionRelation {
    fn check(&self, public_values: &ParamBundle, _witness: &[u8]) -> bool {
        matches!(public_values.get(SECRET_COMMITMENT_LABEL), Some(sc) if sc.len() == 32)
    }
}

/// Relation 4 by convention: consumption receipts. Structural only —
/// receipt validity is the signature, checked by the router backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConsumptionReceiptRelation;

impl Relation for ConsumptionReceiptRelation {
    fn check(&self, public_values: &ParamBundle, _witness: &[u8]) -> bool {
        matches!(public_values.get("id"), Some(id) if id.len() == 32)
            && matches!(public_values.get("nf"), Some(nf) if nf.len() == 32)
    }
}

/// Conventional relation ids the simulator registers these under.
pub const INBOX_INJECTION_RELATION: crate::relations::RelationId =
    crate::relations::RelationId(3);
pub const CONSUMPTION_RECEIPT_RELATION: crate::relations::RelationId =
    crate::relations::RelationId(4);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hashing::derive_identifier;

    fn entry(sequence: u64, secret: &[u8], nonce: &Nonce) -> InboxEntry {
        let mut params = ParamBundle::new();
        params.push("note", b"visible".to_vec()).unwrap();
        InboxEntry {
            identifier: derive_identifier(1, b"alice", sequence),
            secret_commitment: commit_secret(secret, &params, nonce).unwrap(),
            public_params: params,
        }
    }

    #[test]
    fn inject_and_duplicate() {
        let mut inbox = Inbox::new();
        let e = entry(0, b"hunter2-hunter2!", &Nonce::ZERO);
        inbox.inject(e.clone()).unwrap();
        assert_eq!(inbox.inject(e.clone()), Err(InboxError::DuplicateEntry));
        assert_eq!(inbox.get(&e.identifier).unwrap(), &e);
        let absent = derive_identifier(1, b"alice", 999);
        assert_eq!(inbox.get(&absent).unwrap_err(), InboxError::NotFound);
    }

    #[test]
    fn consume_once_then_already_consumed() {
        let mut inbox = Inbox::new();
        let secret = b"sixteen-byte-key";
        let nonce = Nonce([2u8; 32]);
        let e = entry(0, secret, &nonce);
        inbox.inject(e.clone()).unwrap();

        let transcript = inbox.consume(&e.identifier, secret, &nonce).unwrap();
        assert_eq!(transcript.identifier, e.identifier);
        assert_eq!(transcript.nullifier, derive_nullifier(&e.identifier, secret));
        assert_eq!(transcript.disclosed_outputs, e.public_params);
        assert_eq!(inbox.nullifier_count(), 1);

        assert_eq!(
            inbox.consume(&e.identifier, secret, &nonce),
            Err(InboxError::AlreadyConsumed)
        );
        assert_eq!(inbox.nullifier_count(), 1);
    }

    #[test]
    fn wrong_secret_records_nothing() {
        let mut inbox = Inbox::new();
        let nonce = Nonce([2u8; 32]);
        let e = entry(0, b"right-secret-val", &nonce);
        inbox.inject(e.clone()).unwrap();

        assert_eq!(
            inbox.consume(&e.identifier, b"wrong-secret-val", &nonce),
            Err(InboxError::WrongSecret)
        );
        assert_eq!(
            inbox.consume(&e.identifier, b"right-secret-val", &Nonce::ZERO),
            Err(InboxError::WrongSecret)
        );
        assert_eq!(inbox.nullifier_count(), 0);
        // still consumable with the right opening
        inbox.consume(&e.identifier, b"right-secret-val", &nonce).unwrap();
    }

    #[test]
    fn same_secret_different_identifiers_unlinkable() {
        let secret = b"shared-secret-xx";
        let a = derive_identifier(1, b"alice", 0);
        let b = derive_identifier(1, b"alice", 1);
        assert_ne!(derive_nullifier(&a, secret), derive_nullifier(&b, secret));
    }

    #[test]
    fn reserved_label_rejected() {
        let mut params = ParamBundle::new();
        params.push(SECRET_LABEL, b"oops".to_vec()).unwrap();
        assert_eq!(
            commit_secret(b"s", &params, &Nonce::ZERO).unwrap_err(),
            InboxError::ReservedLabel
        );
        let mut inbox = Inbox::new();
        let bad = InboxEntry {
            identifier: derive_identifier(1, b"x", 0),
            secret_commitment: Commitment(Digest::ZERO),
            public_params: params,
        };
        assert_eq!(inbox.inject(bad), Err(InboxError::ReservedLabel));
    }

    #[test]
    fn transcript_round_trips() {
        let transcript = ConsumptionTranscript {
            identifier: derive_identifier(1, b"alice", 3),
            nullifier: derive_nullifier(&derive_identifier(1, b"alice", 3), b"s"),
            disclosed_outputs: ParamBundle::new(),
        };
        let bytes = crate::encoding::encode(&transcript).unwrap();
        let back: ConsumptionTranscript = crate::encoding::decode(bytes.as_slice()).unwrap();
        assert_eq!(back, transcript);
    }
}

//! Receiver-side acceptance for proof-carrying messages.
//!
//! The portal is the single place where a message either takes effect or
//! does not. Checks run in a fixed order so every rejection reason is
//! deterministic for a given (input, state) pair:
//!
//! 1. structural well-formedness (else `MalformedMessage`)
//! 2. for interchain messages: attestation quorum (else `OriginInvalid`),
//!    then the sender-finality predicate (else `NotFinal`)
//! 3. identifier freshness (else `ReplayDetected`)
//! 4. commitment opening against the carried public values
//!    (else `BindingMismatch`)
//! 5. router proof verification (else `ProofInvalid`)
//! 6. pre-root continuity with the portal's current root
//!    (else `RootMismatch`)
//!
//! A rejected message leaves the portal state untouched; nothing is
//! consumed or recorded until every check has passed.
//!
//! Public values must carry the message's pre and post roots under the
//! "pre"/"post" labels, matching the root fields on the message. That
//! pulls the roots inside the committed parameters, so a relay cannot
//! re-point an accepted message at different state.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::attestation::{verify_attestation, Attestation, GuardianSet};
use crate::encoding::{
    tags, CanonicalBytes, Decode, DecodeError, Decoder, Encode, EncodeError, Encoder, ParamBundle,
};
use crate::finality::{FinalityTag, SimChain};
use crate::hashing::{
    derive_identifier, encode_for_hash, verify_opening, Commitment, Identifier, Opening,
};
use crate::relations::{RelationId, RelationRegistry, StateRoot, POST_ROOT_LABEL, PRE_ROOT_LABEL};
use crate::router::{Proof, RouterRegistry, VkId};

/// Label under which a message body carries its sequence number
/// (8 octets, little-endian).
pub const SEQ_LABEL: &str = "seq";

/// An addressed, relation-typed message body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub origin_domain: u32,
    pub sender: Vec<u8>,
    pub dest_domain: u32,
    pub relation_id: RelationId,
    pub body: ParamBundle,
}

impl Message {
    /// Sequence number from the body's "seq" entry.
    pub fn sequence(&self) -> Option<u64> {
        let raw: [u8; 8] = self.body.get(SEQ_LABEL)?.try_into().ok()?;
        Some(u64::from_le_bytes(raw))
    }
}

impl Encode for Message {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_tag(tags::MESSAGE);
        self.origin_domain.write(enc)?;
        enc.put_bytes(&self.sender)?;
        self.dest_domain.write(enc)?;
        self.relation_id.0.write(enc)?;
        self.body.write(enc)
    }
}

impl Decode for Message {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        dec.expect_tag(tags::MESSAGE)?;
        Ok(Message {
            origin_domain: u32::read(dec)?,
            sender: dec.get_bytes()?,
            dest_domain: u32::read(dec)?,
            relation_id: RelationId(u32::read(dec)?),
            body: ParamBundle::read(dec)?,
        })
    }
}

/// Proof-carrying message: message, parameter commitment, replay
/// identifier, and a routed validity proof over the public values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pcm {
    pub message: Message,
    pub commitment: Commitment,
    pub identifier: Identifier,
    pub public_values: ParamBundle,
    pub proof: Proof,
    pub vk_id: VkId,
    pub pre_root: StateRoot,
    pub post_root: StateRoot,
}

/// Proof-carrying interchain message: a PCM plus sender-finality evidence
/// and transport attestation over (message, commitment, identifier, tag).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pcim {
    pub pcm: Pcm,
    pub finality_tag: FinalityTag,
    pub attestation: Attestation,
}

/// The bytes a PCIM attestation covers.
pub fn attestation_coverage(pcm: &Pcm, finality_tag: &FinalityTag) -> CanonicalBytes {
    encode_for_hash(&(
        pcm.message.clone(),
        pcm.commitment,
        pcm.identifier,
        *finality_tag,
    ))
}

/// Outcome of one acceptance attempt. `Ok` is the only accepting value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AcceptanceResult {
    Ok,
    ReplayDetected,
    OriginInvalid,
    NotFinal,
    BindingMismatch,
    ProofInvalid,
    RootMismatch,
    MalformedMessage,
}

impl AcceptanceResult {
    pub const ALL: [AcceptanceResult; 8] = [
        AcceptanceResult::Ok,
        AcceptanceResult::ReplayDetected,
        AcceptanceResult::OriginInvalid,
        AcceptanceResult::NotFinal,
        AcceptanceResult::BindingMismatch,
        AcceptanceResult::ProofInvalid,
        AcceptanceResult::RootMismatch,
        AcceptanceResult::MalformedMessage,
    ];

    pub fn accepted(&self) -> bool {
        matches!(self, AcceptanceResult::Ok)
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            AcceptanceResult::Ok => "OK",
            AcceptanceResult::ReplayDetected => "ReplayDetected",
            AcceptanceResult::OriginInvalid => "OriginInvalid",
            AcceptanceResult::NotFinal => "NotFinal",
            AcceptanceResult::BindingMismatch => "BindingMismatch",
            AcceptanceResult::ProofInvalid => "ProofInvalid",
            AcceptanceResult::RootMismatch => "RootMismatch",
            AcceptanceResult::MalformedMessage => "MalformedMessage",
        }
    }
}

impl fmt::Display for AcceptanceResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownAcceptanceResult;

impl FromStr for AcceptanceResult {
    type Err = UnknownAcceptanceResult;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AcceptanceResult::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or(UnknownAcceptanceResult)
    }
}

/// One line of the acceptance log:
/// `hex(identifier) reason hex(pre_root) hex(post_root)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AttemptRecord {
    pub identifier: Identifier,
    pub reason: AcceptanceResult,
    pub pre_root: StateRoot,
    pub post_root: StateRoot,
}

impl fmt::Display for AttemptRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.identifier, self.reason, self.pre_root, self.post_root)
    }
}

/// Read-only registries and chain views an acceptance call consults.
pub struct PortalContext<'a> {
    pub relations: &'a RelationRegistry,
    pub router: &'a RouterRegistry,
    pub chains: &'a BTreeMap<u32, SimChain>,
}

/// Receiver portal state: the replay registry, the current compressed
/// state root, and the guardian sets trusted for origin checks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Portal {
    replay_registry: BTreeSet<Identifier>,
    current_root: StateRoot,
    guardian_sets: BTreeMap<u32, GuardianSet>,
}

impl Portal {
    pub fn new(initial_root: StateRoot) -> Self {
        Portal {
            replay_registry: BTreeSet::new(),
            current_root: initial_root,
            guardian_sets: BTreeMap::new(),
        }
    }

    pub fn register_guardian_set(&mut self, set: GuardianSet) {
        self.guardian_sets.insert(set.set_id(), set);
    }

    pub fn guardian_set(&self, set_id: u32) -> Option<&GuardianSet> {
        self.guardian_sets.get(&set_id)
    }

    pub fn current_root(&self) -> StateRoot {
        self.current_root
    }

    pub fn has_accepted(&self, identifier: &Identifier) -> bool {
        self.replay_registry.contains(identifier)
    }

    pub fn accepted_count(&self) -> usize {
        self.replay_registry.len()
    }

    pub fn accepted_identifiers(&self) -> impl Iterator<Item = &Identifier> {
        self.replay_registry.iter()
    }

    /// Structural checks shared by PCM and PCIM acceptance. A message is
    /// malformed when its identifier does not derive from
    /// (origin_domain, sender, seq), or when the public values' root
    /// entries are absent or disagree with the root fields.
    fn is_well_formed(pcm: &Pcm) -> bool {
        let Some(sequence) = pcm.message.sequence() else {
            return false;
        };
        if derive_identifier(pcm.message.origin_domain, &pcm.message.sender, sequence)
            != pcm.identifier
        {
            return false;
        }
        pcm.public_values.get(PRE_ROOT_LABEL) == Some(pcm.pre_root.0 .0.as_slice())
            && pcm.public_values.get(POST_ROOT_LABEL) == Some(pcm.post_root.0 .0.as_slice())
    }

    fn record(&self, identifier: Identifier, reason: AcceptanceResult, pre: StateRoot) -> AttemptRecord {
        AttemptRecord { identifier, reason, pre_root: pre, post_root: self.current_root }
    }

    /// Run the acceptance pipeline for an intra-domain proof-carrying
    /// message. On success the identifier is consumed and the current
    /// root advances; on any failure the portal is left unchanged.
    pub fn accept_pcm(
        &mut self,
        pcm: &Pcm,
        opening: &Opening,
        ctx: &PortalContext<'_>,
    ) -> AttemptRecord {
        let root_before = self.current_root;
        let reason = self.evaluate_pcm(pcm, opening, ctx);
        if reason.accepted() {
            self.replay_registry.insert(pcm.identifier);
            self.current_root = pcm.post_root;
        }
        self.record(pcm.identifier, reason, root_before)
    }

    /// Acceptance pipeline for an interchain message: origin and finality
    /// first, then the PCM pipeline.
    pub fn accept_pcim(
        &mut self,
        pcim: &Pcim,
        opening: &Opening,
        ctx: &PortalContext<'_>,
    ) -> AttemptRecord {
        let root_before = self.current_root;
        let reason = self.evaluate_pcim(pcim, opening, ctx);
        if reason.accepted() {
            self.replay_registry.insert(pcim.pcm.identifier);
            self.current_root = pcim.pcm.post_root;
        }
        self.record(pcim.pcm.identifier, reason, root_before)
    }

    fn evaluate_pcm(
        &self,
        pcm: &Pcm,
        opening: &Opening,
        ctx: &PortalContext<'_>,
    ) -> AcceptanceResult {
        if !Self::is_well_formed(pcm) {
            return AcceptanceResult::MalformedMessage;
        }
        self.evaluate_checked_pcm(pcm, opening, ctx)
    }

    /// Steps after structural validation: replay, binding, proof, root.
    fn evaluate_checked_pcm(
        &self,
        pcm: &Pcm,
        opening: &Opening,
        ctx: &PortalContext<'_>,
    ) -> AcceptanceResult {
        if self.replay_registry.contains(&pcm.identifier) {
            return AcceptanceResult::ReplayDetected;
        }
        if opening.params != pcm.public_values || !verify_opening(&pcm.commitment, opening) {
            return AcceptanceResult::BindingMismatch;
        }
        match ctx.router.verify(&pcm.proof, &pcm.public_values, &pcm.vk_id, ctx.relations) {
            Ok(true) => {}
            Ok(false) | Err(_) => return AcceptanceResult::ProofInvalid,
        }
        if pcm.pre_root != self.current_root {
            return AcceptanceResult::RootMismatch;
        }
        AcceptanceResult::Ok
    }

    fn evaluate_pcim(
        &self,
        pcim: &Pcim,
        opening: &Opening,
        ctx: &PortalContext<'_>,
    ) -> AcceptanceResult {
        let pcm = &pcim.pcm;
        if !Self::is_well_formed(pcm)
            || pcim.finality_tag.domain_id != pcm.message.origin_domain
        {
            return AcceptanceResult::MalformedMessage;
        }

        let Some(set) = self.guardian_sets.get(&pcim.attestation.set_id) else {
            return AcceptanceResult::OriginInvalid;
        };
        let covered = attestation_coverage(pcm, &pcim.finality_tag);
        match verify_attestation(set, &covered, &pcim.attestation) {
            Ok(true) => {}
            Ok(false) | Err(_) => return AcceptanceResult::OriginInvalid,
        }

        let Some(chain) = ctx.chains.get(&pcim.finality_tag.domain_id) else {
            return AcceptanceResult::NotFinal;
        };
        match chain.is_final(&pcim.finality_tag) {
            Ok(true) => {}
            Ok(false) | Err(_) => return AcceptanceResult::NotFinal,
        }

        self.evaluate_checked_pcm(pcm, opening, ctx)
    }
}

/// Pure adversarial transport: applies a mutator to a message in flight.
/// No validation happens here; the portal judges whatever comes out.
pub fn relay<F: FnOnce(&mut Pcim)>(pcim: Pcim, mutator: F) -> Pcim {
    let mut out = pcim;
    mutator(&mut out);
    out
}

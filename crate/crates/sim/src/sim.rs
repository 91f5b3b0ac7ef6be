//! Deterministic scenario execution: one event loop, one seeded
//! generator, everything replayable bit-for-bit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use pcimkit_core::attestation::{attest, Attestation, GuardianSet, SigningKey};
use pcimkit_core::encoding::encode_list;
use pcimkit_core::finality::SimChain;
use pcimkit_core::hashing::{
    commit, derive_identifier, hash, DomainTag, Identifier, Nonce, Opening,
};
use pcimkit_core::inbox::{
    commit_secret, export_receipt, ConsumptionReceiptRelation, Inbox, InboxEntry,
    InboxInjectionRelation, ReceiptProver, CONSUMPTION_RECEIPT_RELATION,
    INBOX_INJECTION_RELATION, SECRET_COMMITMENT_LABEL,
};
use pcimkit_core::portal::{
    attestation_coverage, relay, AttemptRecord, Message, Pcim, Pcm, Portal,
    PortalContext, SEQ_LABEL,
};
use pcimkit_core::relations::{
    HashPreimageRelation, MerkleTransitionRelation, MerkleTree, RelationId, RelationRegistry,
    StateRoot, HASH_PREIMAGE_RELATION, MERKLE_TRANSITION_RELATION, POST_ROOT_LABEL,
    PRE_ROOT_LABEL,
};
use pcimkit_core::router::{receipt_digest, BackendKind, Proof, RouterRegistry, VkId};
use pcimkit_core::Commitment;
use pcimkit_core::Digest;

use crate::keys;
use crate::report::{AllocationMatrix, Invariant};
use crate::scenario::{
    DomainConfig, Event, MessageKind, MutatorKind, PayloadSpec, Scenario, ScenarioError,
    SecretSpec, SendSpec,
};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario invalid: {0}")]
    Scenario(#[from] ScenarioError),
    #[error("event {index}: {message}")]
    Event { index: usize, message: String },
}

fn event_err<T>(index: usize, message: impl Into<String>) -> Result<T, SimError> {
    Err(SimError::Event { index, message: message.into() })
}

/// Exit statuses of a scenario run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitStatus {
    Pass,
    ExpectMismatch,
    ViolationMissed,
}

impl ExitStatus {
    pub fn code(&self) -> i32 {
        match self {
            ExitStatus::Pass => 0,
            ExitStatus::ExpectMismatch => 1,
            ExitStatus::ViolationMissed => 2,
        }
    }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub name: String,
    pub seed: u64,
    /// One line per acceptance or consumption attempt:
    /// `hex(identifier) reason hex(pre_root) hex(post_root)`, with the
    /// hex transcript appended on successful consumptions.
    pub log: String,
    pub matrix: AllocationMatrix,
    pub mismatches: Vec<String>,
    pub coverage_gaps: Vec<&'static str>,
    /// Outcome string per event; None for chain events and held sends.
    pub outcomes: Vec<Option<String>>,
}

impl RunOutcome {
    pub fn exit(&self) -> ExitStatus {
        if self.matrix.total_missed() > 0 {
            ExitStatus::ViolationMissed
        } else if !self.mismatches.is_empty() || !self.coverage_gaps.is_empty() {
            ExitStatus::ExpectMismatch
        } else {
            ExitStatus::Pass
        }
    }
}

pub struct SecretParts {
    pub secret: Vec<u8>,
    pub nonce: Nonce,
    pub public_params: pcimkit_core::ParamBundle,
}

pub struct BuiltMessage {
    pub pcm: Pcm,
    pub pcim: Option<Pcim>,
    pub opening: Opening,
    pub relation: RelationId,
    pub updates: Vec<(u32, [u8; 32])>,
    pub secret: Option<SecretParts>,
}

struct GuardianSlot {
    set: GuardianSet,
    signers: Vec<SigningKey>,
}

/// All mutable state of one simulated multi-domain world.
pub struct SimEnv {
    pub seed: u64,
    rng: ChaCha8Rng,
    relations: RelationRegistry,
    router: RouterRegistry,
    chains: BTreeMap<u32, SimChain>,
    domain_cfg: BTreeMap<u32, DomainConfig>,
    portal: Portal,
    inbox: Inbox,
    tree: MerkleTree,
    guardians: BTreeMap<u32, GuardianSlot>,
    vk_slots: BTreeMap<String, (VkId, BackendKind, RelationId)>,
    receipt_provers: BTreeMap<String, ReceiptProver>,
    sequences: BTreeMap<(u32, Vec<u8>), u64>,
}

impl SimEnv {
    pub fn from_scenario(scenario: &Scenario, seed: u64) -> Result<SimEnv, SimError> {
        let mut relations = RelationRegistry::new();
        relations
            .register(
                MERKLE_TRANSITION_RELATION,
                Box::new(MerkleTransitionRelation::new(scenario.tree_depth)),
            )
            .expect("fresh registry");
        relations
            .register(HASH_PREIMAGE_RELATION, Box::new(HashPreimageRelation))
            .expect("fresh registry");
        relations
            .register(INBOX_INJECTION_RELATION, Box::new(InboxInjectionRelation))
            .expect("fresh registry");
        relations
            .register(CONSUMPTION_RECEIPT_RELATION, Box::new(ConsumptionReceiptRelation))
            .expect("fresh registry");

        let mut router = RouterRegistry::new();
        let mut vk_slots = BTreeMap::new();
        let mut receipt_provers = BTreeMap::new();
        for vk in &scenario.vks {
            let key_material = match vk.backend {
                BackendKind::TransparentReexec => vk.name.as_bytes().to_vec(),
                BackendKind::SignatureReceipt => {
                    let signing_key = keys::receipt_key(seed, &vk.name);
                    signing_key.verifying_key().to_bytes().to_vec()
                }
            };
            let vk_id = router
                .register_vk(vk.backend, vk.relation, key_material, &relations)
                .map_err(|e| SimError::Event {
                    index: 0,
                    message: format!("vk '{}': {e}", vk.name),
                })?;
            if vk.backend == BackendKind::SignatureReceipt {
                receipt_provers.insert(
                    vk.name.clone(),
                    ReceiptProver { vk_id, signing_key: keys::receipt_key(seed, &vk.name) },
                );
            }
            vk_slots.insert(vk.name.clone(), (vk_id, vk.backend, vk.relation));
        }

        let tree = MerkleTree::empty(scenario.tree_depth);
        let mut portal = Portal::new(tree.root());
        let mut guardians = BTreeMap::new();
        for cfg in scenario.guardian_sets.values() {
            let signers: Vec<SigningKey> = (0..cfg.generated_members)
                .map(|i| keys::guardian_key(seed, cfg.set_id, i))
                .collect();
            let mut members: Vec<_> = signers.iter().map(|k| k.verifying_key()).collect();
            members.extend(cfg.explicit_members.iter().copied());
            let threshold = cfg
                .threshold
                .unwrap_or_else(|| GuardianSet::default_threshold(members.len()));
            let set = GuardianSet::new(cfg.set_id, members, threshold).map_err(|e| {
                SimError::Event {
                    index: 0,
                    message: format!("guardian_set {}: {e}", cfg.set_id),
                }
            })?;
            portal.register_guardian_set(set.clone());
            guardians.insert(cfg.set_id, GuardianSlot { set, signers });
        }

        let chains = scenario
            .domains
            .keys()
            .map(|&id| (id, SimChain::new(id)))
            .collect();

        Ok(SimEnv {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            relations,
            router,
            chains,
            domain_cfg: scenario.domains.clone(),
            portal,
            inbox: Inbox::new(),
            tree,
            guardians,
            vk_slots,
            receipt_provers,
            sequences: BTreeMap::new(),
        })
    }

    pub fn portal(&self) -> &Portal {
        &self.portal
    }

    pub fn router(&self) -> &RouterRegistry {
        &self.router
    }

    pub fn relations(&self) -> &RelationRegistry {
        &self.relations
    }

    pub fn chain(&self, domain: u32) -> Option<&SimChain> {
        self.chains.get(&domain)
    }

    pub fn chain_mut(&mut self, domain: u32) -> Option<&mut SimChain> {
        self.chains.get_mut(&domain)
    }

    pub fn inbox(&self) -> &Inbox {
        &self.inbox
    }

    pub fn inbox_mut(&mut self) -> &mut Inbox {
        &mut self.inbox
    }

    pub fn guardian_set(&self, set_id: u32) -> Option<&GuardianSet> {
        self.guardians.get(&set_id).map(|slot| &slot.set)
    }

    pub fn guardian_signers(&self, set_id: u32) -> Option<&[SigningKey]> {
        self.guardians.get(&set_id).map(|slot| slot.signers.as_slice())
    }

    pub fn receipt_prover(&self, vk_name: &str) -> Option<&ReceiptProver> {
        self.receipt_provers.get(vk_name)
    }

    pub fn vk_slot(&self, vk_name: &str) -> Option<(VkId, BackendKind, RelationId)> {
        self.vk_slots.get(vk_name).copied()
    }

    /// Submit a built message and, on acceptance, apply its effects:
    /// merkle updates land in the shadow tree, injection messages land
    /// in the inbox.
    pub fn deliver_built(&mut self, message: &BuiltMessage) -> Result<AttemptRecord, SimError> {
        let record = match &message.pcim {
            Some(pcim) => self.submit_pcim(pcim, &message.opening),
            None => self.submit_pcm(&message.pcm, &message.opening),
        };
        if record.reason.accepted() {
            self.apply_effects(message)?;
        }
        Ok(record)
    }

    /// Post-acceptance effects of a message. Also correct for accepted
    /// relays: binding guarantees an accepted relay carries exactly the
    /// committed parameters of the original.
    fn apply_effects(&mut self, message: &BuiltMessage) -> Result<(), SimError> {
        if message.relation == MERKLE_TRANSITION_RELATION {
            for &(leaf, value) in &message.updates {
                self.tree.update(leaf, value);
            }
            debug_assert_eq!(self.tree.root(), self.portal.current_root());
        }
        if message.relation == INBOX_INJECTION_RELATION {
            self.inject_from(message)?;
        }
        Ok(())
    }

    /// Inject the inbox entry an accepted injection message carries.
    pub fn inject_from(&mut self, message: &BuiltMessage) -> Result<(), SimError> {
        let parts = message.secret.as_ref().expect("injection sends carry secrets");
        let sc: [u8; 32] = message
            .pcm
            .public_values
            .get(SECRET_COMMITMENT_LABEL)
            .expect("injection pv carries sc")
            .try_into()
            .expect("sc is 32 octets");
        self.inbox
            .inject(InboxEntry {
                identifier: message.pcm.identifier,
                secret_commitment: Commitment(Digest(sc)),
                public_params: parts.public_params.clone(),
            })
            .map_err(|e| SimError::Event { index: 0, message: format!("inject: {e}") })
    }

    fn rng_bytes(&mut self, len: usize) -> Vec<u8> {
        (0..len).map(|_| self.rng.gen()).collect()
    }

    fn rng_nonce(&mut self) -> Nonce {
        let mut out = [0u8; 32];
        self.rng.fill(&mut out);
        Nonce(out)
    }

    fn next_sequence(&mut self, domain: u32, sender: &[u8]) -> u64 {
        let counter = self.sequences.entry((domain, sender.to_vec())).or_insert(0);
        let seq = *counter;
        *counter += 1;
        seq
    }

    pub fn submit_pcm(&mut self, pcm: &Pcm, opening: &Opening) -> AttemptRecord {
        let ctx = PortalContext {
            relations: &self.relations,
            router: &self.router,
            chains: &self.chains,
        };
        self.portal.accept_pcm(pcm, opening, &ctx)
    }

    pub fn submit_pcim(&mut self, pcim: &Pcim, opening: &Opening) -> AttemptRecord {
        let ctx = PortalContext {
            relations: &self.relations,
            router: &self.router,
            chains: &self.chains,
        };
        self.portal.accept_pcim(pcim, opening, &ctx)
    }

    /// Build the message a send event describes, without submitting it.
    pub fn build_send(&mut self, index: usize, spec: &SendSpec) -> Result<BuiltMessage, SimError> {
        let &(vk_id, backend, relation) = self
            .vk_slots
            .get(&spec.vk)
            .ok_or_else(|| SimError::Event { index, message: format!("unknown vk {}", spec.vk) })?;

        let sequence = self.next_sequence(spec.domain, &spec.sender);
        let mut body = pcimkit_core::ParamBundle::new();
        body.push(SEQ_LABEL, sequence.to_le_bytes().to_vec())
            .expect("fresh bundle");
        let message = Message {
            origin_domain: spec.domain,
            sender: spec.sender.clone(),
            dest_domain: 0,
            relation_id: relation,
            body,
        };

        // payload: public values, witness, roots, side data
        let mut public_values = pcimkit_core::ParamBundle::new();
        let witness: Vec<u8>;
        let pre_root: StateRoot;
        let post_root: StateRoot;
        let mut updates = Vec::new();
        let mut secret_parts = None;

        match &spec.payload {
            PayloadSpec::Merkle { updates: declared } => {
                let mut planned = declared.clone();
                if planned.is_empty() {
                    let leaf_count = 1u32 << self.tree.depth();
                    let leaf = self.rng.gen_range(0..leaf_count);
                    let mut value = [0u8; 32];
                    self.rng.fill(&mut value);
                    planned.push((leaf, value));
                }
                let mut staged = self.tree.clone();
                pre_root = staged.root();
                let mut commands = Vec::with_capacity(planned.len());
                for &(leaf, value) in &planned {
                    if u64::from(leaf) >= (1u64 << staged.depth()) {
                        return event_err(index, format!("leaf {leaf} out of range"));
                    }
                    commands.push(staged.update(leaf, value));
                }
                post_root = staged.root();
                witness = encode_list(&commands)
                    .expect("command list is small")
                    .into_vec();
                updates = planned;
            }
            PayloadSpec::Preimage { preimage } => {
                let w = match preimage {
                    Some(bytes) => bytes.clone(),
                    None => self.rng_bytes(16),
                };
                public_values
                    .push("h", hash(DomainTag::Commit, &w).0.to_vec())
                    .expect("fresh bundle");
                witness = w;
                pre_root = self.portal.current_root();
                post_root = pre_root;
            }
            PayloadSpec::Inject { secret, params } => {
                let secret = match secret {
                    Some(bytes) => bytes.clone(),
                    None => self.rng_bytes(16),
                };
                let nonce = self.rng_nonce();
                let mut public_params = pcimkit_core::ParamBundle::new();
                for (label, value) in params {
                    public_params.set(label, value.clone());
                }
                let sc = commit_secret(&secret, &public_params, &nonce)
                    .map_err(|e| SimError::Event { index, message: e.to_string() })?;
                public_values
                    .push(SECRET_COMMITMENT_LABEL, sc.0 .0.to_vec())
                    .expect("fresh bundle");
                for (label, value) in public_params.entries() {
                    public_values.set(label, value.clone());
                }
                secret_parts = Some(SecretParts { secret, nonce, public_params });
                witness = Vec::new();
                pre_root = self.portal.current_root();
                post_root = pre_root;
            }
        }

        public_values.set(PRE_ROOT_LABEL, pre_root.0 .0.to_vec());
        public_values.set(POST_ROOT_LABEL, post_root.0 .0.to_vec());

        let proof = match backend {
            BackendKind::TransparentReexec => Proof::transparent(&witness),
            BackendKind::SignatureReceipt => {
                let prover = self
                    .receipt_provers
                    .get(&spec.vk)
                    .ok_or_else(|| SimError::Event {
                        index,
                        message: format!("vk {} has no receipt prover", spec.vk),
                    })?;
                use pcimkit_core::attestation::Signer as _;
                let digest = receipt_digest(&vk_id, &public_values);
                Proof::receipt(&prover.signing_key.sign(digest.as_bytes()))
            }
        };

        let commit_nonce = self.rng_nonce();
        let commitment = commit(&public_values, &commit_nonce);
        let identifier = derive_identifier(spec.domain, &spec.sender, sequence);
        let opening = Opening { nonce: commit_nonce, params: public_values.clone() };
        let pcm = Pcm {
            message,
            commitment,
            identifier,
            public_values,
            proof,
            vk_id,
            pre_root,
            post_root,
        };

        let pcim = if spec.kind == MessageKind::Pcim {
            Some(self.wrap_pcim(index, spec, pcm.clone())?)
        } else {
            None
        };

        Ok(BuiltMessage { pcm, pcim, opening, relation, updates, secret: secret_parts })
    }

    fn wrap_pcim(&mut self, index: usize, spec: &SendSpec, pcm: Pcm) -> Result<Pcim, SimError> {
        let set_id = spec.set_id.expect("validated for pcim sends");
        let chain = self
            .chains
            .get(&spec.domain)
            .ok_or_else(|| SimError::Event { index, message: format!("no chain {}", spec.domain) })?;
        let height = spec.tag_height.unwrap_or_else(|| chain.finalized_height());
        let finality_tag = chain.tag_at(height).ok_or_else(|| SimError::Event {
            index,
            message: format!("tag height {height} above tip"),
        })?;

        let slot = self
            .guardians
            .get(&set_id)
            .ok_or_else(|| SimError::Event { index, message: format!("no guardian set {set_id}") })?;
        let covered = attestation_coverage(&pcm, &finality_tag);
        let threshold = slot.set.threshold();
        let wanted = usize::from(spec.signers.unwrap_or(threshold));
        if wanted > slot.signers.len() {
            return event_err(index, format!("set {set_id} has only {} signing keys", slot.signers.len()));
        }

        let attestation = if wanted >= usize::from(threshold) {
            let signers: Vec<(u8, &SigningKey)> = slot
                .signers
                .iter()
                .take(wanted)
                .enumerate()
                .map(|(i, k)| (i as u8, k))
                .collect();
            attest(&slot.set, &signers, &covered)
                .map_err(|e| SimError::Event { index, message: e.to_string() })?
        } else {
            // deliberately sub-threshold: assemble the bundle directly,
            // exactly as a coalition below quorum would
            use pcimkit_core::attestation::Signer as _;
            let digest = hash(DomainTag::Attest, covered.as_slice());
            let signatures = slot
                .signers
                .iter()
                .take(wanted)
                .enumerate()
                .map(|(i, k)| (i as u8, k.sign(digest.as_bytes())))
                .collect();
            Attestation { set_id, signatures, signed_digest: digest }
        };

        Ok(Pcim { pcm, finality_tag, attestation })
    }

    /// Apply a relay mutator to a copy of an interchain message.
    pub fn mutate(&mut self, pcim: Pcim, mutator: MutatorKind) -> Pcim {
        let outsider = keys::outsider_key(self.seed, 0xF0);
        relay(pcim, |m| match mutator {
            MutatorKind::Identity => {}
            MutatorKind::PublicValues => {
                m.pcm.public_values.set("tamper", vec![0xEE; 8]);
            }
            MutatorKind::ProofPayload => {
                m.pcm.proof = match m.pcm.proof.backend_kind {
                    BackendKind::TransparentReexec => Proof::transparent(b"forged-witness"),
                    BackendKind::SignatureReceipt => {
                        use pcimkit_core::attestation::Signer as _;
                        let digest = hash(DomainTag::Attest, b"forged-receipt");
                        Proof::receipt(&outsider.sign(digest.as_bytes()))
                    }
                };
            }
            MutatorKind::PreRoot => {
                m.pcm.pre_root = StateRoot(Digest({
                    let mut b = m.pcm.pre_root.0 .0;
                    b[0] ^= 0xFF;
                    b
                }));
            }
            MutatorKind::PostRoot => {
                m.pcm.post_root = StateRoot(Digest({
                    let mut b = m.pcm.post_root.0 .0;
                    b[0] ^= 0xFF;
                    b
                }));
            }
            MutatorKind::IdentifierField => {
                let mut b = m.pcm.identifier.0 .0;
                b[0] ^= 0xFF;
                m.pcm.identifier = Identifier(Digest(b));
            }
            MutatorKind::StripSignatures => {
                m.attestation.signatures.truncate(1);
            }
            MutatorKind::ForgeOrigin => {
                use pcimkit_core::attestation::Signer as _;
                let digest = m.attestation.signed_digest;
                for (i, slot) in m.attestation.signatures.iter_mut().enumerate() {
                    let forger = keys::outsider_key(0xBAD, i as u64);
                    *slot = (slot.0, forger.sign(digest.as_bytes()));
                }
            }
            MutatorKind::BumpTag => {
                m.finality_tag.height += 1;
            }
        })
    }
}

/// Execute a scenario. Deterministic for a given (scenario, seed).
pub fn run_scenario(scenario: &Scenario, seed_override: Option<u64>) -> Result<RunOutcome, SimError> {
    let seed = seed_override.unwrap_or(scenario.seed);
    let mut env = SimEnv::from_scenario(scenario, seed)?;
    let mut matrix = AllocationMatrix::new();
    let mut log = String::new();
    let mut outcomes: Vec<Option<String>> = Vec::with_capacity(scenario.events.len());
    let mut built: BTreeMap<usize, BuiltMessage> = BTreeMap::new();
    let mut consumed: BTreeSet<(usize, Vec<u8>)> = BTreeSet::new();

    for (index, event) in scenario.events.iter().enumerate() {
        let outcome = match event {
            Event::Send(spec) => {
                let message = env.build_send(index, spec)?;
                built.insert(index, message);
                if spec.hold {
                    None
                } else {
                    Some(deliver(&mut env, &mut matrix, &mut log, &built, index, false)?)
                }
            }
            Event::Deliver { of } => {
                Some(deliver(&mut env, &mut matrix, &mut log, &built, *of, false)?)
            }
            Event::Resend { of } => {
                Some(deliver(&mut env, &mut matrix, &mut log, &built, *of, true)?)
            }
            Event::Relay { of, mutator } => {
                let target = built
                    .get(of)
                    .ok_or_else(|| SimError::Event { index, message: format!("no message at {of}") })?;
                let Some(pcim) = target.pcim.clone() else {
                    return event_err(index, "relay target is not an interchain message");
                };
                let opening = target.opening.clone();
                let mutated = env.mutate(pcim, *mutator);
                let record = env.submit_pcim(&mutated, &opening);
                matrix.record_attempt(record.reason, true);
                if record.reason.accepted() {
                    if let Some(row) = mutator.targeted_invariant() {
                        matrix.miss(row);
                    }
                    env.apply_effects(target)?;
                }
                let _ = writeln!(log, "{record}");
                Some(record.reason.as_str().to_string())
            }
            Event::Consume { of, secret } => {
                let target = built
                    .get(of)
                    .ok_or_else(|| SimError::Event { index, message: format!("no message at {of}") })?;
                let parts = target
                    .secret
                    .as_ref()
                    .ok_or_else(|| SimError::Event { index, message: "target carries no secret".into() })?;
                let identifier = target.pcm.identifier;
                let nonce = parts.nonce;
                let attempt_secret = match secret {
                    SecretSpec::Honest => parts.secret.clone(),
                    SecretSpec::Explicit(bytes) => bytes.clone(),
                    SecretSpec::Wrong => {
                        let mut s = parts.secret.clone();
                        s[0] ^= 0xFF;
                        s
                    }
                };
                let result = env.inbox.consume(&identifier, &attempt_secret, &nonce);
                let reason = match &result {
                    Ok(_) => "Consumed",
                    Err(pcimkit_core::inbox::InboxError::AlreadyConsumed) => "AlreadyConsumed",
                    Err(pcimkit_core::inbox::InboxError::WrongSecret) => "WrongSecret",
                    Err(pcimkit_core::inbox::InboxError::NotFound) => "NotFound",
                    Err(e) => return event_err(index, format!("consume failed: {e}")),
                };
                matrix.record_consume(matches!(reason, "AlreadyConsumed" | "WrongSecret"));

                // successful consumptions log the hex transcript
                let mut transcript_hex = String::new();
                if let Ok(transcript) = &result {
                    let bytes = pcimkit_core::encoding::encode(transcript)
                        .expect("transcripts are small");
                    transcript_hex = format!(" {}", hex::encode(bytes.as_slice()));

                    let key = (*of, attempt_secret.clone());
                    if !consumed.insert(key) {
                        matrix.miss(Invariant::PrivateConsumption);
                    }
                    // receipt round trip whenever a receipt prover exists
                    if let Some(prover) = env.receipt_provers.values().next() {
                        let (proof, pv, vk_id) = export_receipt(transcript, prover, &env.router)
                            .map_err(|e| SimError::Event { index, message: e.to_string() })?;
                        let verified = env
                            .router
                            .verify(&proof, &pv, &vk_id, &env.relations)
                            .unwrap_or(false);
                        if !verified {
                            matrix.miss(Invariant::ParameterBinding);
                        }
                    }
                }

                let root = env.portal.current_root();
                let _ = writeln!(log, "{identifier} {reason} {root} {root}{transcript_hex}");
                Some(reason.to_string())
            }
            Event::Advance { domain, blocks } => {
                let cfg = *env
                    .domain_cfg
                    .get(domain)
                    .ok_or_else(|| SimError::Event { index, message: format!("no domain {domain}") })?;
                // probabilistic reorg ahead of the new blocks
                let roll: f64 = env.rng.gen();
                let reorg_seed: u64 = env.rng.gen();
                let advance_seed: u64 = env.rng.gen();
                let chain = env.chains.get_mut(domain).expect("checked above");
                if cfg.reorg_probability > 0.0 && roll < cfg.reorg_probability {
                    let slack = chain.tip_height() - chain.finalized_height();
                    let max_depth = u64::from(cfg.reorg_max_depth).min(slack);
                    if max_depth > 0 {
                        let depth = (reorg_seed % max_depth) as u32 + 1;
                        chain
                            .reorg(depth, reorg_seed)
                            .map_err(|e| SimError::Event { index, message: e.to_string() })?;
                    }
                }
                chain.advance(*blocks, advance_seed);
                if let Some(lag) = cfg.finality_lag {
                    let target = chain.tip_height().saturating_sub(lag);
                    if target > chain.finalized_height() {
                        chain
                            .finalize(target)
                            .map_err(|e| SimError::Event { index, message: e.to_string() })?;
                    }
                }
                None
            }
            Event::Reorg { domain, depth } => {
                let seed: u64 = env.rng.gen();
                let chain = env
                    .chains
                    .get_mut(domain)
                    .ok_or_else(|| SimError::Event { index, message: format!("no domain {domain}") })?;
                chain
                    .reorg(*depth, seed)
                    .map_err(|e| SimError::Event { index, message: e.to_string() })?;
                None
            }
            Event::Finalize { domain, height } => {
                let chain = env
                    .chains
                    .get_mut(domain)
                    .ok_or_else(|| SimError::Event { index, message: format!("no domain {domain}") })?;
                let target = height.unwrap_or_else(|| chain.tip_height());
                chain
                    .finalize(target)
                    .map_err(|e| SimError::Event { index, message: e.to_string() })?;
                None
            }
        };
        outcomes.push(outcome);
    }

    let mut mismatches = Vec::new();
    for expectation in &scenario.expectations {
        let actual = outcomes
            .get(expectation.event_index)
            .and_then(|o| o.as_deref())
            .unwrap_or("<none>");
        if actual != expectation.expected {
            mismatches.push(format!(
                "event {}: expected {}, got {}",
                expectation.event_index, expectation.expected, actual
            ));
        }
    }

    // quadrant coverage applies to runs that submit anything at all; an
    // empty message program passes vacuously
    let coverage_gaps: Vec<&'static str> = if log.is_empty() {
        Vec::new()
    } else {
        scenario
            .quadrant
            .required_invariants()
            .iter()
            .filter(|row| matrix.cell(**row).exercised == 0)
            .map(|row| row.as_str())
            .collect()
    };

    Ok(RunOutcome {
        name: scenario.name.clone(),
        seed,
        log,
        matrix,
        mismatches,
        coverage_gaps,
        outcomes,
    })
}

/// Submit a built message; `replay_attempt` marks deliberate duplicates
/// so an acceptance counts as a missed replay violation.
fn deliver(
    env: &mut SimEnv,
    matrix: &mut AllocationMatrix,
    log: &mut String,
    built: &BTreeMap<usize, BuiltMessage>,
    of: usize,
    replay_attempt: bool,
) -> Result<String, SimError> {
    let message = built
        .get(&of)
        .ok_or_else(|| SimError::Event { index: of, message: "message not built".into() })?;
    let was_accepted = env.portal().has_accepted(&message.pcm.identifier);

    let record = env.deliver_built(message)?;
    matrix.record_attempt(record.reason, message.pcim.is_some());

    if replay_attempt && was_accepted && record.reason.accepted() {
        matrix.miss(Invariant::ReplaySafety);
    }

    let _ = writeln!(log, "{record}");
    Ok(record.reason.as_str().to_string())
}

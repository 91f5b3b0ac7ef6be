//! Scenario files: a line-oriented `key = value` grammar with an ordered
//! event list, versioned by the header line `pcimkit-scenario v1`.
//!
//! ```text
//! pcimkit-scenario v1
//! seed = 42
//! quadrant = onchain_scalability      # one of the four use quadrants
//! tree_depth = 4                      # compressed-state tree depth
//!
//! [domain 1]
//! finality_lag = 2                    # auto-finalize to tip - lag; omit for manual
//! reorg_probability = 0.25            # chance an advance is preceded by a reorg
//! reorg_max_depth = 2
//!
//! [guardian_set 7]
//! threshold = 2                       # omit for floor(2n/3)+1
//! members = 3                         # keys generated from the seed
//! # member = <hex pubkey>             # or explicit verification keys
//!
//! [vk merkle]
//! backend = transparent_reexec        # or signature_receipt
//! relation = 1                        # 1 merkle, 2 preimage, 3 inject, 4 receipt
//!
//! event: send kind=pcim domain=1 set=7 vk=merkle leaf=3 value=ab
//! event: resend 0
//! event: advance domain=1 blocks=3
//! event: finalize domain=1
//! event: reorg domain=1 depth=2
//! event: relay 0 mutate=public_values
//! event: consume 5
//! expect: 0 OK
//! expect: 1 ReplayDetected
//! ```
//!
//! Events are referenced by their 0-based position in the event list.
//! `send ... hold` builds a message without submitting it; a later
//! `deliver <idx>` submits it. `resend` re-submits (a replay attempt).
//! Payload fields default to seed-derived values when omitted.

use std::collections::BTreeMap;
use std::str::FromStr;

use pcimkit_core::attestation::VerifyingKey;
use pcimkit_core::portal::AcceptanceResult;
use pcimkit_core::relations::RelationId;
use pcimkit_core::router::BackendKind;
use thiserror::Error;

use crate::report::Invariant;

pub const SCENARIO_HEADER: &str = "pcimkit-scenario v1";

#[derive(Debug, Error)]
#[error("line {line}: {message}")]
pub struct ScenarioError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ScenarioError> {
    Err(ScenarioError { line, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrant {
    OnchainScalability,
    OnchainPrivacy,
    OffchainScalability,
    OffchainPrivacy,
}

impl Quadrant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Quadrant::OnchainScalability => "onchain_scalability",
            Quadrant::OnchainPrivacy => "onchain_privacy",
            Quadrant::OffchainScalability => "offchain_scalability",
            Quadrant::OffchainPrivacy => "offchain_privacy",
        }
    }

    /// Invariant rows a run in this quadrant must exercise.
    pub fn required_invariants(&self) -> &'static [Invariant] {
        match self {
            Quadrant::OnchainScalability => &[
                Invariant::ReplaySafety,
                Invariant::ParameterBinding,
                Invariant::FinalityAlignment,
            ],
            Quadrant::OnchainPrivacy => &[
                Invariant::ReplaySafety,
                Invariant::ParameterBinding,
                Invariant::PrivateConsumption,
            ],
            Quadrant::OffchainScalability => {
                &[Invariant::ReplaySafety, Invariant::ParameterBinding]
            }
            Quadrant::OffchainPrivacy => &Invariant::ALL,
        }
    }
}

impl FromStr for Quadrant {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "onchain_scalability" => Ok(Quadrant::OnchainScalability),
            "onchain_privacy" => Ok(Quadrant::OnchainPrivacy),
            "offchain_scalability" => Ok(Quadrant::OffchainScalability),
            "offchain_privacy" => Ok(Quadrant::OffchainPrivacy),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DomainConfig {
    pub finality_lag: Option<u64>,
    pub reorg_probability: f64,
    pub reorg_max_depth: u32,
}

impl Default for DomainConfig {
    fn default() -> Self {
        DomainConfig { finality_lag: None, reorg_probability: 0.0, reorg_max_depth: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct GuardianSetConfig {
    pub set_id: u32,
    pub threshold: Option<u8>,
    pub generated_members: u8,
    pub explicit_members: Vec<VerifyingKey>,
}

#[derive(Debug, Clone)]
pub struct VkConfig {
    pub name: String,
    pub backend: BackendKind,
    pub relation: RelationId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageKind {
    Pcm,
    Pcim,
}

#[derive(Debug, Clone)]
pub enum PayloadSpec {
    /// Explicit leaf updates, or seed-derived ones when empty.
    Merkle { updates: Vec<(u32, [u8; 32])> },
    Preimage { preimage: Option<Vec<u8>> },
    Inject { secret: Option<Vec<u8>>, params: Vec<(String, Vec<u8>)> },
}

#[derive(Debug, Clone)]
pub struct SendSpec {
    pub kind: MessageKind,
    pub domain: u32,
    pub sender: Vec<u8>,
    pub set_id: Option<u32>,
    pub vk: String,
    pub hold: bool,
    pub tag_height: Option<u64>,
    pub signers: Option<u8>,
    /// Resolved against the vk's relation during validation.
    pub payload: PayloadSpec,
    raw_updates: Vec<(u32, [u8; 32])>,
    raw_preimage: Option<Vec<u8>>,
    raw_secret: Option<Vec<u8>>,
    raw_params: Vec<(String, Vec<u8>)>,
}

/// Relay-time adversarial transforms. Each names the invariant it
/// attacks so accepted mutations can be booked as missed violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MutatorKind {
    Identity,
    PublicValues,
    ProofPayload,
    PreRoot,
    PostRoot,
    IdentifierField,
    StripSignatures,
    ForgeOrigin,
    BumpTag,
}

impl MutatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MutatorKind::Identity => "identity",
            MutatorKind::PublicValues => "public_values",
            MutatorKind::ProofPayload => "proof",
            MutatorKind::PreRoot => "pre_root",
            MutatorKind::PostRoot => "post_root",
            MutatorKind::IdentifierField => "identifier",
            MutatorKind::StripSignatures => "strip_signatures",
            MutatorKind::ForgeOrigin => "forge_origin",
            MutatorKind::BumpTag => "bump_tag",
        }
    }

    pub fn targeted_invariant(&self) -> Option<Invariant> {
        match self {
            MutatorKind::Identity => None,
            MutatorKind::PublicValues
            | MutatorKind::ProofPayload
            | MutatorKind::PreRoot
            | MutatorKind::PostRoot
            | MutatorKind::IdentifierField => Some(Invariant::ParameterBinding),
            MutatorKind::StripSignatures | MutatorKind::ForgeOrigin => {
                Some(Invariant::OriginAuthenticity)
            }
            MutatorKind::BumpTag => Some(Invariant::FinalityAlignment),
        }
    }
}

impl FromStr for MutatorKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        [
            MutatorKind::Identity,
            MutatorKind::PublicValues,
            MutatorKind::ProofPayload,
            MutatorKind::PreRoot,
            MutatorKind::PostRoot,
            MutatorKind::IdentifierField,
            MutatorKind::StripSignatures,
            MutatorKind::ForgeOrigin,
            MutatorKind::BumpTag,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or(())
    }
}

#[derive(Debug, Clone)]
pub enum SecretSpec {
    Honest,
    Wrong,
    Explicit(Vec<u8>),
}

#[derive(Debug, Clone)]
pub enum Event {
    Send(SendSpec),
    Resend { of: usize },
    Deliver { of: usize },
    Relay { of: usize, mutator: MutatorKind },
    Consume { of: usize, secret: SecretSpec },
    Advance { domain: u32, blocks: u32 },
    Reorg { domain: u32, depth: u32 },
    Finalize { domain: u32, height: Option<u64> },
}

impl Event {
    /// Does this event submit something and therefore log an attempt?
    pub fn produces_attempt(&self) -> bool {
        match self {
            Event::Send(spec) => !spec.hold,
            Event::Resend { .. } | Event::Deliver { .. } | Event::Relay { .. } => true,
            Event::Consume { .. } => true,
            Event::Advance { .. } | Event::Reorg { .. } | Event::Finalize { .. } => false,
        }
    }
}

/// Outcome names a scenario expectation may use: the acceptance reasons
/// plus the consumption outcomes.
pub const CONSUME_OUTCOMES: [&str; 4] = ["Consumed", "AlreadyConsumed", "WrongSecret", "NotFound"];

#[derive(Debug, Clone)]
pub struct Expectation {
    pub event_index: usize,
    pub expected: String,
    pub line: usize,
}

#[derive(Debug)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub quadrant: Quadrant,
    pub tree_depth: usize,
    pub domains: BTreeMap<u32, DomainConfig>,
    pub guardian_sets: BTreeMap<u32, GuardianSetConfig>,
    pub vks: Vec<VkConfig>,
    pub events: Vec<Event>,
    pub expectations: Vec<Expectation>,
}

enum Section {
    Top,
    Domain(u32),
    GuardianSet(u32),
    Vk(String),
}

struct KvLine<'a> {
    positional: Vec<&'a str>,
    pairs: Vec<(&'a str, &'a str)>,
    flags: Vec<&'a str>,
}

fn split_tokens(body: &str) -> KvLine<'_> {
    let mut out = KvLine { positional: Vec::new(), pairs: Vec::new(), flags: Vec::new() };
    for token in body.split_whitespace() {
        if let Some((key, value)) = token.split_once('=') {
            out.pairs.push((key, value));
        } else if token.chars().all(|c| c.is_ascii_digit()) {
            out.positional.push(token);
        } else {
            out.flags.push(token);
        }
    }
    out
}

impl<'a> KvLine<'a> {
    fn get(&self, key: &str) -> Option<&'a str> {
        self.pairs.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    fn has_flag(&self, flag: &str) -> bool {
        self.flags.contains(&flag)
    }
}

fn parse_num<T: FromStr>(line: usize, field: &str, raw: &str) -> Result<T, ScenarioError> {
    raw.parse::<T>()
        .map_err(|_| ScenarioError { line, message: format!("bad numeric value for {field}: {raw}") })
}

fn parse_hex(line: usize, field: &str, raw: &str) -> Result<Vec<u8>, ScenarioError> {
    hex::decode(raw)
        .map_err(|_| ScenarioError { line, message: format!("bad hex value for {field}: {raw}") })
}

fn parse_leaf_value(line: usize, raw: &str) -> Result<[u8; 32], ScenarioError> {
    let bytes = parse_hex(line, "value", raw)?;
    if bytes.len() > 32 {
        return err(line, "leaf value longer than 32 octets");
    }
    let mut out = [0u8; 32];
    out[..bytes.len()].copy_from_slice(&bytes);
    Ok(out)
}

impl Scenario {
    pub fn parse(name: &str, text: &str) -> Result<Scenario, ScenarioError> {
        let mut scenario = Scenario {
            name: name.to_string(),
            seed: 0,
            quadrant: Quadrant::OnchainScalability,
            tree_depth: pcimkit_core::relations::DEFAULT_TREE_DEPTH,
            domains: BTreeMap::new(),
            guardian_sets: BTreeMap::new(),
            vks: Vec::new(),
            events: Vec::new(),
            expectations: Vec::new(),
        };
        let mut section = Section::Top;
        let mut saw_header = false;

        for (index, raw_line) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if !saw_header {
                if line != SCENARIO_HEADER {
                    return err(line_no, format!("expected header '{SCENARIO_HEADER}'"));
                }
                saw_header = true;
                continue;
            }

            if let Some(rest) = line.strip_prefix("event:") {
                section = Section::Top;
                let event = Self::parse_event(line_no, rest.trim())?;
                scenario.events.push(event);
                continue;
            }
            if let Some(rest) = line.strip_prefix("expect:") {
                section = Section::Top;
                let mut parts = rest.split_whitespace();
                let (Some(idx), Some(outcome), None) = (parts.next(), parts.next(), parts.next())
                else {
                    return err(line_no, "expect needs: <event index> <outcome>");
                };
                let event_index: usize = parse_num(line_no, "event index", idx)?;
                let valid = AcceptanceResult::ALL.iter().any(|r| r.as_str() == outcome)
                    || CONSUME_OUTCOMES.contains(&outcome);
                if !valid {
                    return err(line_no, format!("unknown outcome '{outcome}'"));
                }
                scenario.expectations.push(Expectation {
                    event_index,
                    expected: outcome.to_string(),
                    line: line_no,
                });
                continue;
            }
            if let Some(header) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let mut parts = header.split_whitespace();
                match (parts.next(), parts.next(), parts.next()) {
                    (Some("domain"), Some(id), None) => {
                        let id: u32 = parse_num(line_no, "domain id", id)?;
                        scenario.domains.entry(id).or_default();
                        section = Section::Domain(id);
                    }
                    (Some("guardian_set"), Some(id), None) => {
                        let id: u32 = parse_num(line_no, "set id", id)?;
                        scenario.guardian_sets.insert(
                            id,
                            GuardianSetConfig {
                                set_id: id,
                                threshold: None,
                                generated_members: 0,
                                explicit_members: Vec::new(),
                            },
                        );
                        section = Section::GuardianSet(id);
                    }
                    (Some("vk"), Some(name), None) => {
                        if scenario.vks.iter().any(|vk| vk.name == name) {
                            return err(line_no, format!("duplicate vk name '{name}'"));
                        }
                        scenario.vks.push(VkConfig {
                            name: name.to_string(),
                            backend: BackendKind::TransparentReexec,
                            relation: RelationId(0),
                        });
                        section = Section::Vk(name.to_string());
                    }
                    _ => return err(line_no, format!("unknown section '[{header}]'")),
                }
                continue;
            }

            let Some((key, value)) = line.split_once('=') else {
                return err(line_no, format!("expected 'key = value', got '{line}'"));
            };
            let key = key.trim();
            let value = value.trim();
            match &mut section {
                Section::Top => match key {
                    "seed" => scenario.seed = parse_num(line_no, "seed", value)?,
                    "quadrant" => {
                        scenario.quadrant = value
                            .parse()
                            .map_err(|_| ScenarioError {
                                line: line_no,
                                message: format!("unknown quadrant '{value}'"),
                            })?;
                    }
                    "tree_depth" => {
                        let depth: usize = parse_num(line_no, "tree_depth", value)?;
                        if depth == 0 || depth > 20 {
                            return err(line_no, "tree_depth must be in 1..=20");
                        }
                        scenario.tree_depth = depth;
                    }
                    _ => return err(line_no, format!("unknown top-level key '{key}'")),
                },
                Section::Domain(id) => {
                    let cfg = scenario.domains.get_mut(id).expect("section opened");
                    match key {
                        "finality_lag" => {
                            cfg.finality_lag = Some(parse_num(line_no, "finality_lag", value)?)
                        }
                        "reorg_probability" => {
                            let p: f64 = parse_num(line_no, "reorg_probability", value)?;
                            if !(0.0..=1.0).contains(&p) {
                                return err(line_no, "reorg_probability must be in [0, 1]");
                            }
                            cfg.reorg_probability = p;
                        }
                        "reorg_max_depth" => {
                            cfg.reorg_max_depth = parse_num(line_no, "reorg_max_depth", value)?
                        }
                        _ => return err(line_no, format!("unknown domain key '{key}'")),
                    }
                }
                Section::GuardianSet(id) => {
                    let cfg = scenario.guardian_sets.get_mut(id).expect("section opened");
                    match key {
                        "threshold" => {
                            cfg.threshold = Some(parse_num(line_no, "threshold", value)?)
                        }
                        "members" => {
                            cfg.generated_members = parse_num(line_no, "members", value)?
                        }
                        "member" => {
                            let bytes = parse_hex(line_no, "member", value)?;
                            let bytes: [u8; 32] = bytes.try_into().map_err(|_| ScenarioError {
                                line: line_no,
                                message: "member key must be 32 octets of hex".to_string(),
                            })?;
                            let key = VerifyingKey::from_bytes(&bytes).map_err(|_| {
                                ScenarioError {
                                    line: line_no,
                                    message: "member bytes are not a valid key".to_string(),
                                }
                            })?;
                            cfg.explicit_members.push(key);
                        }
                        _ => return err(line_no, format!("unknown guardian_set key '{key}'")),
                    }
                }
                Section::Vk(name) => {
                    let cfg = scenario
                        .vks
                        .iter_mut()
                        .find(|vk| vk.name == *name)
                        .expect("section opened");
                    match key {
                        "backend" => {
                            cfg.backend = value.parse().map_err(|_| ScenarioError {
                                line: line_no,
                                message: format!("unknown backend '{value}'"),
                            })?;
                        }
                        "relation" => cfg.relation = RelationId(parse_num(line_no, "relation", value)?),
                        _ => return err(line_no, format!("unknown vk key '{key}'")),
                    }
                }
            }
        }

        if !saw_header {
            return err(1, format!("missing header '{SCENARIO_HEADER}'"));
        }
        scenario.validate()?;
        Ok(scenario)
    }

    fn parse_event(line: usize, body: &str) -> Result<Event, ScenarioError> {
        let Some((verb, rest)) = body
            .split_once(char::is_whitespace)
            .map(|(v, r)| (v, r.trim()))
            .or(Some((body, "")))
        else {
            return err(line, "empty event");
        };
        let kv = split_tokens(rest);
        let reference = |field: &str| -> Result<usize, ScenarioError> {
            match kv.positional.first() {
                Some(raw) => parse_num(line, field, raw),
                None => err(line, format!("{verb} needs an event index")),
            }
        };

        match verb {
            "send" => {
                let kind = match kv.get("kind") {
                    None | Some("pcm") => MessageKind::Pcm,
                    Some("pcim") => MessageKind::Pcim,
                    Some(other) => return err(line, format!("unknown message kind '{other}'")),
                };
                let domain = match kv.get("domain") {
                    Some(raw) => parse_num(line, "domain", raw)?,
                    None => 1,
                };
                let sender = kv.get("sender").unwrap_or("sender").as_bytes().to_vec();
                let set_id = match kv.get("set") {
                    Some(raw) => Some(parse_num(line, "set", raw)?),
                    None => None,
                };
                let Some(vk) = kv.get("vk") else {
                    return err(line, "send needs vk=<name>");
                };
                let tag_height = match kv.get("tag_height") {
                    Some(raw) => Some(parse_num(line, "tag_height", raw)?),
                    None => None,
                };
                let signers = match kv.get("signers") {
                    Some(raw) => Some(parse_num(line, "signers", raw)?),
                    None => None,
                };

                // payload fields; which ones apply is validated against
                // the vk's relation later
                let mut updates = Vec::new();
                if let Some(raw) = kv.get("leaf") {
                    let index: u32 = parse_num(line, "leaf", raw)?;
                    let value = match kv.get("value") {
                        Some(raw) => parse_leaf_value(line, raw)?,
                        None => return err(line, "leaf= needs value=<hex>"),
                    };
                    updates.push((index, value));
                }
                if let Some(raw) = kv.get("leafs") {
                    for part in raw.split(',') {
                        let Some((idx, val)) = part.split_once(':') else {
                            return err(line, "leafs needs idx:hex pairs");
                        };
                        updates.push((
                            parse_num(line, "leafs", idx)?,
                            parse_leaf_value(line, val)?,
                        ));
                    }
                }
                let preimage = match kv.get("preimage") {
                    Some(raw) => Some(parse_hex(line, "preimage", raw)?),
                    None => None,
                };
                let secret = match kv.get("secret") {
                    Some(raw) => Some(parse_hex(line, "secret", raw)?),
                    None => None,
                };
                let mut params = Vec::new();
                for (key, value) in &kv.pairs {
                    if let Some(label) = key.strip_prefix("param.") {
                        params.push((label.to_string(), parse_hex(line, key, value)?));
                    }
                }

                Ok(Event::Send(SendSpec {
                    kind,
                    domain,
                    sender,
                    set_id,
                    vk: vk.to_string(),
                    hold: kv.has_flag("hold"),
                    tag_height,
                    signers,
                    payload: PayloadSpec::Merkle { updates: Vec::new() },
                    raw_updates: updates,
                    raw_preimage: preimage,
                    raw_secret: secret,
                    raw_params: params,
                }))
            }
            "resend" => Ok(Event::Resend { of: reference("resend target")? }),
            "deliver" => Ok(Event::Deliver { of: reference("deliver target")? }),
            "relay" => {
                let of = reference("relay target")?;
                let mutator = match kv.get("mutate") {
                    Some(raw) => raw.parse().map_err(|_| ScenarioError {
                        line,
                        message: format!("unknown mutator '{raw}'"),
                    })?,
                    None => MutatorKind::Identity,
                };
                Ok(Event::Relay { of, mutator })
            }
            "consume" => {
                let of = reference("consume target")?;
                let secret = if kv.has_flag("wrong") {
                    SecretSpec::Wrong
                } else {
                    match kv.get("secret") {
                        Some(raw) => SecretSpec::Explicit(parse_hex(line, "secret", raw)?),
                        None => SecretSpec::Honest,
                    }
                };
                Ok(Event::Consume { of, secret })
            }
            "advance" => {
                let domain = match kv.get("domain") {
                    Some(raw) => parse_num(line, "domain", raw)?,
                    None => 1,
                };
                let blocks = match kv.get("blocks") {
                    Some(raw) => parse_num(line, "blocks", raw)?,
                    None => 1,
                };
                Ok(Event::Advance { domain, blocks })
            }
            "reorg" => {
                let domain = match kv.get("domain") {
                    Some(raw) => parse_num(line, "domain", raw)?,
                    None => 1,
                };
                let depth = match kv.get("depth") {
                    Some(raw) => parse_num(line, "depth", raw)?,
                    None => 1,
                };
                Ok(Event::Reorg { domain, depth })
            }
            "finalize" => {
                let domain = match kv.get("domain") {
                    Some(raw) => parse_num(line, "domain", raw)?,
                    None => 1,
                };
                let height = match kv.get("height") {
                    Some(raw) => Some(parse_num(line, "height", raw)?),
                    None => None,
                };
                Ok(Event::Finalize { domain, height })
            }
            other => err(line, format!("unknown event verb '{other}'")),
        }
    }

    fn validate(&mut self) -> Result<(), ScenarioError> {
        for vk in &self.vks {
            if vk.relation.0 == 0 {
                return err(0, format!("vk '{}' missing relation", vk.name));
            }
            if !(1..=4).contains(&vk.relation.0) {
                return err(0, format!("vk '{}' references unreserved relation", vk.name));
            }
        }
        for cfg in self.guardian_sets.values() {
            let count =
                usize::from(cfg.generated_members) + cfg.explicit_members.len();
            if count == 0 || count > 255 {
                return err(0, format!("guardian_set {} has no members", cfg.set_id));
            }
        }

        // second pass over events: resolve payload kinds and references
        let vks = self.vks.clone();
        let domains: Vec<u32> = self.domains.keys().copied().collect();
        let sets: Vec<u32> = self.guardian_sets.keys().copied().collect();
        let mut send_relations: Vec<Option<RelationId>> = Vec::with_capacity(self.events.len());

        for (index, event) in self.events.iter_mut().enumerate() {
            match event {
                Event::Send(spec) => {
                    let Some(vk) = vks.iter().find(|vk| vk.name == spec.vk) else {
                        return err(0, format!("event {index}: unknown vk '{}'", spec.vk));
                    };
                    if !domains.contains(&spec.domain) {
                        return err(0, format!("event {index}: domain {} not declared", spec.domain));
                    }
                    if spec.kind == MessageKind::Pcim {
                        let set_id = match spec.set_id {
                            Some(id) => id,
                            None if sets.len() == 1 => sets[0],
                            None => {
                                return err(
                                    0,
                                    format!("event {index}: pcim send needs set=<id>"),
                                )
                            }
                        };
                        if !sets.contains(&set_id) {
                            return err(0, format!("event {index}: guardian_set {set_id} not declared"));
                        }
                        spec.set_id = Some(set_id);
                    }
                    spec.payload = match vk.relation.0 {
                        1 => PayloadSpec::Merkle { updates: spec.raw_updates.clone() },
                        2 => PayloadSpec::Preimage { preimage: spec.raw_preimage.clone() },
                        3 => PayloadSpec::Inject {
                            secret: spec.raw_secret.clone(),
                            params: spec.raw_params.clone(),
                        },
                        _ => {
                            return err(
                                0,
                                format!("event {index}: sends cannot target relation {}", vk.relation),
                            )
                        }
                    };
                    send_relations.push(Some(vk.relation));
                }
                Event::Resend { of } | Event::Deliver { of } | Event::Relay { of, .. } => {
                    if *of >= index || send_relations.get(*of).copied().flatten().is_none() {
                        return err(0, format!("event {index}: reference {of} is not an earlier send"));
                    }
                    send_relations.push(None);
                }
                Event::Consume { of, .. } => {
                    match send_relations.get(*of).copied().flatten() {
                        Some(relation) if *of < index => {
                            if relation != pcimkit_core::inbox::INBOX_INJECTION_RELATION {
                                return err(
                                    0,
                                    format!("event {index}: consume target {of} is not an injection send"),
                                );
                            }
                        }
                        _ => {
                            return err(
                                0,
                                format!("event {index}: reference {of} is not an earlier send"),
                            )
                        }
                    }
                    send_relations.push(None);
                }
                Event::Advance { domain, .. }
                | Event::Reorg { domain, .. }
                | Event::Finalize { domain, .. } => {
                    if !domains.contains(domain) {
                        return err(0, format!("event {index}: domain {domain} not declared"));
                    }
                    send_relations.push(None);
                }
            }
        }

        for expectation in &self.expectations {
            match self.events.get(expectation.event_index) {
                Some(event) if event.produces_attempt() => {}
                Some(_) => {
                    return err(
                        expectation.line,
                        format!("event {} produces no outcome", expectation.event_index),
                    )
                }
                None => {
                    return err(
                        expectation.line,
                        format!("event index {} out of range", expectation.event_index),
                    )
                }
            }
        }
        Ok(())
    }
}

impl SendSpec {
    /// Programmatic construction for the adversary suite and tests; the
    /// payload is taken as already resolved.
    pub fn new(
        kind: MessageKind,
        domain: u32,
        vk: impl Into<String>,
        payload: PayloadSpec,
    ) -> SendSpec {
        SendSpec {
            kind,
            domain,
            sender: b"sender".to_vec(),
            set_id: None,
            vk: vk.into(),
            hold: false,
            tag_height: None,
            signers: None,
            payload,
            raw_updates: Vec::new(),
            raw_preimage: None,
            raw_secret: None,
            raw_params: Vec::new(),
        }
    }

    pub fn with_sender(mut self, sender: &[u8]) -> SendSpec {
        self.sender = sender.to_vec();
        self
    }
}

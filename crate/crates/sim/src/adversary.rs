//! The adversary suite: fixed randomized attacker families, one per
//! layer-crossing invariant, each driven by the seeded generator.
//!
//! Every adversary produces `attempts` submissions against a world built
//! from the base scenario's configuration. A violation is *caught* when
//! the attack is rejected and *missed* when it lands; a clean run has
//! zero misses.

use std::collections::BTreeSet;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pcimkit_core::attestation::{Attestation, Signer as _};
use pcimkit_core::hashing::{hash, DomainTag, Opening};
use pcimkit_core::portal::attestation_coverage;

use crate::keys;
use crate::scenario::{MessageKind, MutatorKind, PayloadSpec, Scenario, SendSpec};
use crate::sim::{SimEnv, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    /// Duplicates honest messages at random points in the schedule.
    Replayer,
    /// Relays that preserve (message, commitment, identifier) while
    /// mutating public values, proofs, roots, or the opening.
    Substituter,
    /// Tags messages to not-yet-final or soon-abandoned blocks.
    PrefinalityForker,
    /// Attests with sub-threshold coalitions padded by outsider keys.
    OriginForger,
    /// Permutes honest schedules; acceptance must be order-insensitive.
    Reorderer,
}

impl AdversaryKind {
    pub const ALL: [AdversaryKind; 5] = [
        AdversaryKind::Replayer,
        AdversaryKind::Substituter,
        AdversaryKind::PrefinalityForker,
        AdversaryKind::OriginForger,
        AdversaryKind::Reorderer,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AdversaryKind::Replayer => "replayer",
            AdversaryKind::Substituter => "substituter",
            AdversaryKind::PrefinalityForker => "prefinality_forker",
            AdversaryKind::OriginForger => "origin_forger",
            AdversaryKind::Reorderer => "reorderer",
        }
    }
}

impl FromStr for AdversaryKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        AdversaryKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AdversarySummary {
    pub kind: AdversaryKind,
    pub attempts: u64,
    pub violations_caught: u64,
    pub violations_missed: u64,
}

impl AdversarySummary {
    /// Machine-readable one-liner.
    pub fn render(&self) -> String {
        format!(
            "kind={} attempts={} caught={} missed={}",
            self.kind.as_str(),
            self.attempts,
            self.violations_caught,
            self.violations_missed
        )
    }
}

/// Names of vks the suite expects in the base scenario, keyed by what the
/// adversary needs: a preimage vk always, plus guardian sets for the
/// interchain families.
fn preimage_vk(base: &Scenario) -> Result<String, SimError> {
    base.vks
        .iter()
        .find(|vk| vk.relation == pcimkit_core::relations::HASH_PREIMAGE_RELATION)
        .map(|vk| vk.name.clone())
        .ok_or(SimError::Event { index: 0, message: "base scenario declares no preimage vk".into() })
}

fn first_domain(base: &Scenario) -> Result<u32, SimError> {
    base.domains
        .keys()
        .next()
        .copied()
        .ok_or(SimError::Event { index: 0, message: "base scenario declares no domain".into() })
}

pub fn run_adversary_suite(
    base: &Scenario,
    kind: AdversaryKind,
    trials: u32,
) -> Result<AdversarySummary, SimError> {
    match kind {
        AdversaryKind::Replayer => run_replayer(base, trials),
        AdversaryKind::Substituter => run_substituter(base, trials),
        AdversaryKind::PrefinalityForker => run_prefinality_forker(base, trials),
        AdversaryKind::OriginForger => run_origin_forger(base, trials),
        AdversaryKind::Reorderer => run_reorderer(base, trials),
    }
}

fn run_replayer(base: &Scenario, trials: u32) -> Result<AdversarySummary, SimError> {
    let vk = preimage_vk(base)?;
    let domain = first_domain(base)?;
    let mut env = SimEnv::from_scenario(base, base.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(base.seed ^ 0x2EB1A);

    let mut summary = AdversarySummary {
        kind: AdversaryKind::Replayer,
        attempts: 0,
        violations_caught: 0,
        violations_missed: 0,
    };

    // batches of honest messages with >=30% duplicates, shuffled
    let mut remaining = trials;
    while remaining > 0 {
        let batch = remaining.min(16) as usize;
        remaining -= batch as u32;
        let originals: Vec<_> = (0..batch)
            .map(|_| {
                let spec = SendSpec::new(
                    MessageKind::Pcm,
                    domain,
                    &vk,
                    PayloadSpec::Preimage { preimage: None },
                );
                env.build_send(0, &spec)
            })
            .collect::<Result<_, _>>()?;

        let mut schedule: Vec<usize> = (0..batch).collect();
        for _ in 0..batch.max(1) {
            schedule.push(rng.gen_range(0..batch)); // the duplicates
        }
        schedule.shuffle(&mut rng);

        let mut accepted: BTreeSet<usize> = BTreeSet::new();
        for slot in schedule {
            let message = &originals[slot];
            let duplicate = accepted.contains(&slot);
            let record = env.submit_pcm(&message.pcm, &message.opening);
            if duplicate {
                summary.attempts += 1;
                if record.reason.accepted() {
                    summary.violations_missed += 1;
                } else {
                    summary.violations_caught += 1;
                }
            } else if record.reason.accepted() {
                accepted.insert(slot);
            }
        }
    }
    Ok(summary)
}

fn run_substituter(base: &Scenario, trials: u32) -> Result<AdversarySummary, SimError> {
    let vk = preimage_vk(base)?;
    let domain = first_domain(base)?;
    let set_id = base.guardian_sets.keys().next().copied().ok_or(SimError::Event {
        index: 0,
        message: "substituter needs a guardian set".into(),
    })?;
    let mut env = SimEnv::from_scenario(base, base.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(base.seed ^ 0x5B5717);

    let mut summary = AdversarySummary {
        kind: AdversaryKind::Substituter,
        attempts: 0,
        violations_caught: 0,
        violations_missed: 0,
    };

    const MUTATORS: [MutatorKind; 5] = [
        MutatorKind::PublicValues,
        MutatorKind::ProofPayload,
        MutatorKind::PreRoot,
        MutatorKind::PostRoot,
        MutatorKind::IdentifierField,
    ];

    for trial in 0..trials {
        let mut spec = SendSpec::new(
            MessageKind::Pcim,
            domain,
            &vk,
            PayloadSpec::Preimage { preimage: None },
        );
        spec.set_id = Some(set_id);
        let message = env.build_send(trial as usize, &spec)?;
        let pcim = message.pcim.clone().expect("pcim send");
        let committed = message.opening.params.clone();

        // half the trials also swap the opening to match the mutated
        // public values; commitment binding must still reject
        let mutator = MUTATORS[rng.gen_range(0..MUTATORS.len())];
        let mutated = env.mutate(pcim, mutator);
        let swap_opening = mutator == MutatorKind::PublicValues && rng.gen_bool(0.5);
        let opening = if swap_opening {
            Opening { nonce: message.opening.nonce, params: mutated.pcm.public_values.clone() }
        } else {
            message.opening.clone()
        };

        let record = env.submit_pcim(&mutated, &opening);
        summary.attempts += 1;
        if record.reason.accepted() && mutated.pcm.public_values != committed {
            summary.violations_missed += 1;
        } else if !record.reason.accepted() {
            summary.violations_caught += 1;
        }
    }
    Ok(summary)
}

fn run_prefinality_forker(base: &Scenario, trials: u32) -> Result<AdversarySummary, SimError> {
    let vk = preimage_vk(base)?;
    let domain = first_domain(base)?;
    let set_id = base.guardian_sets.keys().next().copied().ok_or(SimError::Event {
        index: 0,
        message: "prefinality forker needs a guardian set".into(),
    })?;
    let mut env = SimEnv::from_scenario(base, base.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(base.seed ^ 0xF02C);

    let mut summary = AdversarySummary {
        kind: AdversaryKind::PrefinalityForker,
        attempts: 0,
        violations_caught: 0,
        violations_missed: 0,
    };

    for trial in 0..trials {
        // grow the chain past the watermark
        let advance_seed: u64 = rng.gen();
        let chain = env.chain_mut(domain).expect("declared domain");
        chain.advance(3, advance_seed);
        let tip = chain.tip_height();

        let abandoned_variant = trial % 2 == 1;
        let tag_height = tip; // above the watermark right now

        let mut spec = SendSpec::new(
            MessageKind::Pcim,
            domain,
            &vk,
            PayloadSpec::Preimage { preimage: None },
        );
        spec.set_id = Some(set_id);
        spec.tag_height = Some(tag_height);
        let message = env.build_send(trial as usize, &spec)?;
        let pcim = message.pcim.clone().expect("pcim send");

        if abandoned_variant {
            // abandon the tagged block, then finalize past its height:
            // the tag now names a fork-store block at a finalized height
            let reorg_seed: u64 = rng.gen();
            let chain = env.chain_mut(domain).expect("declared domain");
            chain.reorg(2, reorg_seed).expect("depth within unfinalized range");
            let new_tip = chain.tip_height();
            chain.finalize(new_tip).expect("tip is reachable");
        }

        let record = env.submit_pcim(&pcim, &message.opening);
        summary.attempts += 1;
        if record.reason.accepted() {
            summary.violations_missed += 1;
        } else {
            summary.violations_caught += 1;
        }
    }
    Ok(summary)
}

fn run_origin_forger(base: &Scenario, trials: u32) -> Result<AdversarySummary, SimError> {
    let vk = preimage_vk(base)?;
    let domain = first_domain(base)?;
    let set_ids: Vec<u32> = base.guardian_sets.keys().copied().collect();
    if set_ids.is_empty() {
        return Err(SimError::Event { index: 0, message: "origin forger needs guardian sets".into() });
    }
    let mut env = SimEnv::from_scenario(base, base.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(base.seed ^ 0x0F09);

    let mut summary = AdversarySummary {
        kind: AdversaryKind::OriginForger,
        attempts: 0,
        violations_caught: 0,
        violations_missed: 0,
    };

    for trial in 0..trials {
        let set_id = set_ids[trial as usize % set_ids.len()];
        let threshold = usize::from(env.guardian_set(set_id).expect("declared set").threshold());
        let insiders = env.guardian_signers(set_id).expect("generated set").to_vec();

        // build an honest message shell, then replace its attestation
        // with the forged coalition's
        let mut spec = SendSpec::new(
            MessageKind::Pcim,
            domain,
            &vk,
            PayloadSpec::Preimage { preimage: None },
        );
        spec.set_id = Some(set_id);
        let message = env.build_send(trial as usize, &spec)?;
        let mut pcim = message.pcim.clone().expect("pcim send");

        let coalition = rng.gen_range(0..threshold); // strictly below quorum
        let covered = attestation_coverage(&pcim.pcm, &pcim.finality_tag);
        let digest = hash(DomainTag::Attest, covered.as_slice());
        // insider keys up to the coalition size, outsiders claiming the
        // remaining member slots
        let signatures = (0..threshold)
            .map(|index| {
                let signature = if index < coalition {
                    insiders[index].sign(digest.as_bytes())
                } else {
                    keys::outsider_key(base.seed, index as u64).sign(digest.as_bytes())
                };
                (index as u8, signature)
            })
            .collect();
        pcim.attestation = Attestation { set_id, signatures, signed_digest: digest };

        let record = env.submit_pcim(&pcim, &message.opening);
        summary.attempts += 1;
        if record.reason.accepted() {
            summary.violations_missed += 1;
        } else {
            summary.violations_caught += 1;
        }
    }
    Ok(summary)
}

fn run_reorderer(base: &Scenario, trials: u32) -> Result<AdversarySummary, SimError> {
    let vk = preimage_vk(base)?;
    let domain = first_domain(base)?;
    let mut rng = ChaCha8Rng::seed_from_u64(base.seed ^ 0x2E02D);

    let mut summary = AdversarySummary {
        kind: AdversaryKind::Reorderer,
        attempts: 0,
        violations_caught: 0,
        violations_missed: 0,
    };

    let mut remaining = trials;
    let mut round = 0u64;
    while remaining > 0 {
        round += 1;
        let batch = remaining.min(16) as usize;
        remaining -= batch as u32;
        // fresh world per round so acceptance sets are comparable
        let mut env = SimEnv::from_scenario(base, base.seed.wrapping_add(round))?;
        let mut messages: Vec<_> = (0..batch)
            .map(|_| {
                let spec = SendSpec::new(
                    MessageKind::Pcm,
                    domain,
                    &vk,
                    PayloadSpec::Preimage { preimage: None },
                );
                env.build_send(0, &spec)
            })
            .collect::<Result<_, _>>()?;
        messages.shuffle(&mut rng);

        let expected: BTreeSet<_> = messages.iter().map(|m| m.pcm.identifier).collect();
        for message in &messages {
            let record = env.submit_pcm(&message.pcm, &message.opening);
            summary.attempts += 1;
            if !record.reason.accepted() {
                summary.violations_missed += 1; // order must not matter
            }
        }
        let accepted: BTreeSet<_> = env.portal().accepted_identifiers().copied().collect();
        if accepted != expected {
            summary.violations_missed += 1;
        }
    }
    Ok(summary)
}

//! Deterministic multi-domain simulator for proof-carrying messages:
//! scenario files, an adversary suite, and the invariant-allocation
//! report. The `pcimkit` binary is a thin CLI over this crate.

pub mod adversary;
pub mod keys;
pub mod report;
pub mod scenario;
pub mod sim;

pub use adversary::{run_adversary_suite, AdversaryKind, AdversarySummary};
pub use report::{AllocationMatrix, Invariant};
pub use scenario::{Scenario, ScenarioError};
pub use sim::{run_scenario, ExitStatus, RunOutcome, SimEnv, SimError};

/// Environment variable that overrides scenario seeds when set.
pub const SEED_ENV_VAR: &str = "PCIMKIT_SEED";

/// Seed precedence: explicit flag, then the environment variable, then
/// whatever the scenario file says.
pub fn effective_seed(flag: Option<u64>) -> Option<u64> {
    flag.or_else(|| {
        std::env::var(SEED_ENV_VAR)
            .ok()
            .and_then(|raw| raw.parse().ok())
    })
}

//! The invariant-allocation matrix: which layer enforced what, how often,
//! and whether anything slipped through.

use std::fmt::Write as _;

use pcimkit_core::portal::AcceptanceResult;

/// The five layer-crossing invariants, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Invariant {
    OriginAuthenticity,
    ReplaySafety,
    FinalityAlignment,
    ParameterBinding,
    PrivateConsumption,
}

impl Invariant {
    pub const ALL: [Invariant; 5] = [
        Invariant::OriginAuthenticity,
        Invariant::ReplaySafety,
        Invariant::FinalityAlignment,
        Invariant::ParameterBinding,
        Invariant::PrivateConsumption,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Invariant::OriginAuthenticity => "origin_authenticity",
            Invariant::ReplaySafety => "replay_safety",
            Invariant::FinalityAlignment => "finality_alignment",
            Invariant::ParameterBinding => "parameter_binding",
            Invariant::PrivateConsumption => "private_consumption",
        }
    }

    /// The module that enforces this invariant in this artifact.
    pub fn enforcing_module(&self) -> &'static str {
        match self {
            Invariant::OriginAuthenticity => "attestation",
            Invariant::ReplaySafety => "portal",
            Invariant::FinalityAlignment => "finality",
            Invariant::ParameterBinding => "crypto_core+portal",
            Invariant::PrivateConsumption => "inbox",
        }
    }

    fn index(&self) -> usize {
        *self as usize
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Cell {
    pub exercised: u64,
    pub caught: u64,
    pub missed: u64,
}

/// One row per invariant; cells count checks exercised, violations
/// caught, and violations missed during a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AllocationMatrix {
    cells: [Cell; 5],
}

impl AllocationMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cell(&self, invariant: Invariant) -> Cell {
        self.cells[invariant.index()]
    }

    pub fn exercise(&mut self, invariant: Invariant) {
        self.cells[invariant.index()].exercised += 1;
    }

    pub fn catch(&mut self, invariant: Invariant) {
        self.cells[invariant.index()].caught += 1;
    }

    pub fn miss(&mut self, invariant: Invariant) {
        self.cells[invariant.index()].missed += 1;
    }

    pub fn total_missed(&self) -> u64 {
        self.cells.iter().map(|c| c.missed).sum()
    }

    pub fn merge(&mut self, other: &AllocationMatrix) {
        for (mine, theirs) in self.cells.iter_mut().zip(other.cells.iter()) {
            mine.exercised += theirs.exercised;
            mine.caught += theirs.caught;
            mine.missed += theirs.missed;
        }
    }

    /// Record one acceptance attempt. The fixed check order lets the
    /// final reason tell exactly which checks ran and which one caught.
    ///
    /// PCIM pipeline: structural, origin, finality tag, replay, binding,
    /// proof, root continuity. PCM runs the same minus origin and tag.
    pub fn record_attempt(&mut self, reason: AcceptanceResult, interchain: bool) {
        use AcceptanceResult::*;
        // checks in execution order: (row, reason that check emits)
        let mut checks: Vec<(Invariant, AcceptanceResult)> = Vec::with_capacity(7);
        checks.push((Invariant::ParameterBinding, MalformedMessage));
        if interchain {
            checks.push((Invariant::OriginAuthenticity, OriginInvalid));
            checks.push((Invariant::FinalityAlignment, NotFinal));
        }
        checks.push((Invariant::ReplaySafety, ReplayDetected));
        checks.push((Invariant::ParameterBinding, BindingMismatch));
        checks.push((Invariant::ParameterBinding, ProofInvalid));
        checks.push((Invariant::FinalityAlignment, RootMismatch));

        for (row, emits) in checks {
            self.exercise(row);
            if emits == reason {
                self.catch(row);
                return;
            }
        }
        // reason == Ok: every check ran, nothing caught
    }

    /// Record one consumption attempt.
    pub fn record_consume(&mut self, caught_violation: bool) {
        self.exercise(Invariant::PrivateConsumption);
        if caught_violation {
            self.catch(Invariant::PrivateConsumption);
        }
    }

    /// Human-readable table.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<22} {:<20} {:>9} {:>7} {:>7}",
            "invariant", "module", "exercised", "caught", "missed"
        );
        for invariant in Invariant::ALL {
            let cell = self.cell(invariant);
            let _ = writeln!(
                out,
                "{:<22} {:<20} {:>9} {:>7} {:>7}",
                invariant.as_str(),
                invariant.enforcing_module(),
                cell.exercised,
                cell.caught,
                cell.missed
            );
        }
        out
    }

    /// Line-oriented form: `invariant module exercised caught missed`.
    pub fn render_structured(&self) -> String {
        let mut out = String::new();
        for invariant in Invariant::ALL {
            let cell = self.cell(invariant);
            let _ = writeln!(
                out,
                "{} {} {} {} {}",
                invariant.as_str(),
                invariant.enforcing_module(),
                cell.exercised,
                cell.caught,
                cell.missed
            );
        }
        out
    }
}

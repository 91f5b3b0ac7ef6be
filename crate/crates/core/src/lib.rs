//! Proof-carrying message primitives.
//!
//! Everything a receiver needs to accept a cross-domain message
//! mechanically, independent of bridge internals:
//!
//! - [`encoding`] — one canonical byte encoding for every domain value
//! - [`hashing`] — domain-separated hashing, identifiers, and the
//!   binding commitment scheme
//! - [`attestation`] — t-of-n guardian signatures for origin authenticity
//! - [`finality`] — simulated sender chains with an explicit finality
//!   watermark and the finality predicate
//! - [`relations`] — the relation registry, the Merkle state-transition
//!   relation, and the sequential batch operator
//! - [`router`] — `verify(proof, public_values, vk_id)` over pluggable
//!   verifier backends and a self-describing key registry
//! - [`portal`] — the receiver-side acceptance pipeline for PCMs and
//!   PCIMs: replay, binding, proof, root, origin, and finality checks
//! - [`inbox`] — secret-gated private consumption with nullifiers and
//!   signature receipts
//!
//! The crate is `no_std` (alloc only); all IO, scenario handling, and the
//! CLI live in the companion simulator crate.

#![cfg_attr(not(test), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod attestation;
pub mod encoding;
pub mod finality;
pub mod hashing;
pub mod inbox;
pub mod portal;
pub mod relations;
pub mod rng;
pub mod router;

pub use encoding::{encode, decode, CanonicalBytes, ParamBundle};
pub use hashing::{
    commit, derive_identifier, hash, verify_opening, Commitment, Digest, DomainTag, Identifier,
    Nonce, Opening,
};
pub use portal::{AcceptanceResult, AttemptRecord, Message, Pcim, Pcm, Portal, PortalContext};

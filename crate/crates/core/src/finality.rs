//! Simulated sender-side chains with reorgs and a finality watermark.
//!
//! Finality is an explicit finalized-height watermark rather than a
//! probabilistic depth, which makes the finality predicate decidable:
//! a tag is final iff it names the canonical block at a height at or
//! below the watermark. Blocks above the watermark can be abandoned by
//! a reorg; abandoned blocks are remembered in a fork store so tests can
//! build tags that reference them.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::encoding::{tags, Decode, DecodeError, Decoder, Encode, EncodeError, Encoder};
use crate::hashing::{encode_for_hash, hash, Digest, DomainTag};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Block {
    pub height: u64,
    pub hash: Digest,
    pub parent: Digest,
}

/// Sender-finality evidence carried by an interchain message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FinalityTag {
    pub domain_id: u32,
    pub height: u64,
    pub block_hash: Digest,
}

impl Encode for FinalityTag {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_tag(tags::FINALITY_TAG);
        self.domain_id.write(enc)?;
        self.height.write(enc)?;
        self.block_hash.write(enc)
    }
}

impl Decode for FinalityTag {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        dec.expect_tag(tags::FINALITY_TAG)?;
        Ok(FinalityTag {
            domain_id: u32::read(dec)?,
            height: u64::read(dec)?,
            block_hash: Digest::read(dec)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainError {
    /// Reorg depth would cross the finalized watermark.
    ReorgIntoFinalized,
    /// finalize() called with a height below the current watermark.
    FinalityRegression,
    /// finalize() called with a height above the tip.
    FinalityBeyondTip,
    /// Tag and chain belong to different domains.
    DomainMismatch,
}

impl fmt::Display for ChainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainError::ReorgIntoFinalized => write!(f, "reorg would cross finalized height"),
            ChainError::FinalityRegression => write!(f, "finalized height cannot decrease"),
            ChainError::FinalityBeyondTip => write!(f, "finalized height cannot exceed tip"),
            ChainError::DomainMismatch => write!(f, "tag domain does not match chain domain"),
        }
    }
}

/// Hash-linked simulated chain. Heights increase by one from genesis;
/// the prefix at or below `finalized_height` is immutable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimChain {
    domain_id: u32,
    blocks: Vec<Block>,
    finalized_height: u64,
    fork_store: BTreeMap<Digest, u64>,
}

fn block_hash(domain_id: u32, height: u64, parent: &Digest, draw: u64) -> Digest {
    let payload = encode_for_hash(&(domain_id, height, *parent, draw));
    hash(DomainTag::Root, payload.as_slice())
}

impl SimChain {
    /// New chain holding only its genesis block, which is final.
    pub fn new(domain_id: u32) -> Self {
        let genesis = Block {
            height: 0,
            hash: block_hash(domain_id, 0, &Digest::ZERO, 0),
            parent: Digest::ZERO,
        };
        SimChain {
            domain_id,
            blocks: alloc::vec![genesis],
            finalized_height: 0,
            fork_store: BTreeMap::new(),
        }
    }

    pub fn domain_id(&self) -> u32 {
        self.domain_id
    }

    pub fn tip(&self) -> &Block {
        self.blocks.last().expect("chain always holds genesis")
    }

    pub fn tip_height(&self) -> u64 {
        self.tip().height
    }

    pub fn finalized_height(&self) -> u64 {
        self.finalized_height
    }

    pub fn block_at(&self, height: u64) -> Option<&Block> {
        self.blocks.get(height as usize)
    }

    /// Abandoned block hashes with the heights they occupied.
    pub fn fork_store(&self) -> &BTreeMap<Digest, u64> {
        &self.fork_store
    }

    /// Tag naming the canonical block at `height`.
    pub fn tag_at(&self, height: u64) -> Option<FinalityTag> {
        self.block_at(height).map(|block| FinalityTag {
            domain_id: self.domain_id,
            height,
            block_hash: block.hash,
        })
    }

    fn append_blocks(&mut self, n: u64, rng: &mut SplitMix64) {
        for _ in 0..n {
            let parent = *self.tip();
            let height = parent.height + 1;
            let hash = block_hash(self.domain_id, height, &parent.hash, rng.next_u64());
            self.blocks.push(Block { height, hash, parent: parent.hash });
        }
    }

    /// Append `n_blocks` new blocks. Block hashes mix in a seeded draw so
    /// distinct branches are distinguishable.
    pub fn advance(&mut self, n_blocks: u32, rng_seed: u64) {
        let mut rng = SplitMix64::new(rng_seed);
        self.append_blocks(u64::from(n_blocks), &mut rng);
    }

    /// Abandon the top `depth` blocks into the fork store, then extend the
    /// surviving prefix by `depth + 1` blocks so the new branch dominates.
    pub fn reorg(&mut self, depth: u32, rng_seed: u64) -> Result<(), ChainError> {
        let depth = u64::from(depth);
        if depth > self.tip_height() - self.finalized_height {
            return Err(ChainError::ReorgIntoFinalized);
        }
        for _ in 0..depth {
            let abandoned = self.blocks.pop().expect("depth bounded by tip height");
            self.fork_store.insert(abandoned.hash, abandoned.height);
        }
        let mut rng = SplitMix64::new(rng_seed);
        self.append_blocks(depth + 1, &mut rng);
        Ok(())
    }

    /// Raise the finalized watermark. Monotone, bounded by the tip.
    pub fn finalize(&mut self, new_finalized_height: u64) -> Result<(), ChainError> {
        if new_finalized_height < self.finalized_height {
            return Err(ChainError::FinalityRegression);
        }
        if new_finalized_height > self.tip_height() {
            return Err(ChainError::FinalityBeyondTip);
        }
        self.finalized_height = new_finalized_height;
        Ok(())
    }

    /// The finality predicate: true iff the tag names the canonical block
    /// at a height at or below the finalized watermark.
    pub fn is_final(&self, tag: &FinalityTag) -> Result<bool, ChainError> {
        if tag.domain_id != self.domain_id {
            return Err(ChainError::DomainMismatch);
        }
        if tag.height > self.finalized_height {
            return Ok(false);
        }
        let block = self.block_at(tag.height).expect("finalized height within chain");
        Ok(block.hash == tag.block_hash)
    }
}

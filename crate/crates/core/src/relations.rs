//! Declared relations: the registry, the compressed-state Merkle
//! transition relation, and the batch operator.
//!
//! A relation decides whether (public_values, witness) pairs are valid.
//! The portal never interprets witnesses itself; it asks the verifier
//! router, which asks the relation registered under the message's
//! relation id.
//!
//! Reserved ids: 1 = merkle-transition, 2 = hash-preimage.
//!
//! The Merkle transition relation works over trees of 2^d all-32-octet
//! leaves (empty = all-zero), with internal nodes
//! `hash("root", left || right)`. Its witness is a canonical list of
//! update commands, so a batch of chained updates is itself one witness:
//! the relation is closed under sequential chaining, which is the batch
//! operator implemented here.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::encoding::{
    decode_list, tags, Decode, DecodeError, Decoder, Encode, EncodeError, Encoder, ParamBundle,
};
use crate::hashing::{hash, Digest, DomainTag};

/// Identifier of a registered relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationId(pub u32);

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub const MERKLE_TRANSITION_RELATION: RelationId = RelationId(1);
pub const HASH_PREIMAGE_RELATION: RelationId = RelationId(2);

/// Default tree depth for library instances (256 leaves).
pub const DEFAULT_TREE_DEPTH: usize = 8;

/// All-zero value of an untouched leaf slot.
pub const EMPTY_LEAF: [u8; 32] = [0u8; 32];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationError {
    DuplicateRelationId,
    UnknownRelation,
    /// Adjacent statements in a batch do not chain: post[k] != pre[k+1].
    BatchChainBroken,
    EmptyBatch,
}

impl fmt::Display for RelationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelationError::DuplicateRelationId => write!(f, "relation id already registered"),
            RelationError::UnknownRelation => write!(f, "relation id not registered"),
            RelationError::BatchChainBroken => write!(f, "batch statements do not chain"),
            RelationError::EmptyBatch => write!(f, "batch is empty"),
        }
    }
}

/// A deterministic predicate over (public_values, witness).
pub trait Relation {
    fn check(&self, public_values: &ParamBundle, witness: &[u8]) -> bool;

    /// True when the relation is closed under the sequential batch
    /// operator, i.e. a chained list of witnesses is itself a witness.
    fn batchable(&self) -> bool {
        false
    }
}

/// Append-only relation registry, shared read-only after setup.
#[derive(Default)]
pub struct RelationRegistry {
    entries: BTreeMap<u32, Box<dyn Relation + Send + Sync>>,
}

impl RelationRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(
        &mut self,
        id: RelationId,
        relation: Box<dyn Relation + Send + Sync>,
    ) -> Result<RelationId, RelationError> {
        if self.entries.contains_key(&id.0) {
            return Err(RelationError::DuplicateRelationId);
        }
        self.entries.insert(id.0, relation);
        Ok(id)
    }

    pub fn get(&self, id: RelationId) -> Result<&(dyn Relation + Send + Sync), RelationError> {
        self.entries
            .get(&id.0)
            .map(|r| r.as_ref())
            .ok_or(RelationError::UnknownRelation)
    }

    pub fn contains(&self, id: RelationId) -> bool {
        self.entries.contains_key(&id.0)
    }

    pub fn ids(&self) -> impl Iterator<Item = RelationId> + '_ {
        self.entries.keys().map(|&id| RelationId(id))
    }
}

/// Root of a Merkle tree over 2^d leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct StateRoot(pub Digest);

impl fmt::Display for StateRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Encode for StateRoot {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_fixed(tags::STATE_ROOT, &self.0 .0);
        Ok(())
    }
}

impl Decode for StateRoot {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        Ok(StateRoot(Digest(dec.get_fixed(tags::STATE_ROOT)?)))
    }
}

/// Which side of the parent the sibling occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub sibling: Digest,
    pub side: Side,
}

impl Encode for PathStep {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_tag(tags::PATH_STEP);
        self.sibling.write(enc)?;
        let code: u32 = match self.side {
            Side::Left => 0,
            Side::Right => 1,
        };
        code.write(enc)
    }
}

impl Decode for PathStep {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        dec.expect_tag(tags::PATH_STEP)?;
        let sibling = Digest::read(dec)?;
        let side = match u32::read(dec)? {
            0 => Side::Left,
            1 => Side::Right,
            _ => return Err(DecodeError::InvalidValue),
        };
        Ok(PathStep { sibling, side })
    }
}

/// One leaf update plus the authentication path for its slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpdateCommand {
    pub leaf_index: u32,
    pub old_leaf: [u8; 32],
    pub new_leaf: [u8; 32],
    pub merkle_path: Vec<PathStep>,
}

impl Encode for UpdateCommand {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_tag(tags::UPDATE_COMMAND);
        self.leaf_index.write(enc)?;
        enc.put_bytes(&self.old_leaf)?;
        enc.put_bytes(&self.new_leaf)?;
        enc.put_list(&self.merkle_path)
    }
}

impl Decode for UpdateCommand {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        dec.expect_tag(tags::UPDATE_COMMAND)?;
        let leaf_index = u32::read(dec)?;
        let old_leaf: [u8; 32] =
            dec.get_bytes()?.try_into().map_err(|_| DecodeError::InvalidValue)?;
        let new_leaf: [u8; 32] =
            dec.get_bytes()?.try_into().map_err(|_| DecodeError::InvalidValue)?;
        let merkle_path = dec.get_list()?;
        Ok(UpdateCommand { leaf_index, old_leaf, new_leaf, merkle_path })
    }
}

impl UpdateCommand {
    /// Structural invariants: index within 2^d, and each path step's side
    /// agrees with the corresponding bit of the index.
    pub fn is_well_formed(&self) -> bool {
        let depth = self.merkle_path.len();
        if depth > 32 {
            return false;
        }
        if depth < 32 && u64::from(self.leaf_index) >= (1u64 << depth) {
            return false;
        }
        self.merkle_path.iter().enumerate().all(|(level, step)| {
            let bit = (self.leaf_index >> level) & 1;
            match step.side {
                Side::Right => bit == 0,
                Side::Left => bit == 1,
            }
        })
    }
}

/// Fold a leaf value up an authentication path to a root.
pub fn fold_path(leaf: &[u8; 32], path: &[PathStep]) -> StateRoot {
    let mut current = Digest(*leaf);
    let mut buf = [0u8; 64];
    for step in path {
        match step.side {
            Side::Left => {
                buf[..32].copy_from_slice(step.sibling.as_bytes());
                buf[32..].copy_from_slice(current.as_bytes());
            }
            Side::Right => {
                buf[..32].copy_from_slice(current.as_bytes());
                buf[32..].copy_from_slice(step.sibling.as_bytes());
            }
        }
        current = hash(DomainTag::Root, &buf);
    }
    StateRoot(current)
}

/// True iff folding the old leaf up the command's path yields `pre_root`
/// and folding the new leaf up the same path yields `post_root`.
///
/// Malformed commands (index/side disagreement, overlong path) fail the
/// check rather than erroring.
pub fn merkle_transition_check(
    pre_root: &StateRoot,
    post_root: &StateRoot,
    cmd: &UpdateCommand,
) -> bool {
    if !cmd.is_well_formed() {
        return false;
    }
    fold_path(&cmd.old_leaf, &cmd.merkle_path) == *pre_root
        && fold_path(&cmd.new_leaf, &cmd.merkle_path) == *post_root
}

/// A (pre_root, post_root, commands) statement. A single update is a
/// statement with one command; composing chained statements concatenates
/// their command lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionStatement {
    pub pre_root: StateRoot,
    pub post_root: StateRoot,
    pub commands: Vec<UpdateCommand>,
}

impl TransitionStatement {
    pub fn single(pre_root: StateRoot, post_root: StateRoot, cmd: UpdateCommand) -> Self {
        TransitionStatement { pre_root, post_root, commands: alloc::vec![cmd] }
    }
}

/// Sequentially check a statement's commands, threading the intermediate
/// roots. True iff every command checks and the thread ends at post_root.
pub fn check_transition(statement: &TransitionStatement) -> bool {
    let mut current = statement.pre_root;
    for cmd in &statement.commands {
        if !cmd.is_well_formed() {
            return false;
        }
        if fold_path(&cmd.old_leaf, &cmd.merkle_path) != current {
            return false;
        }
        current = fold_path(&cmd.new_leaf, &cmd.merkle_path);
    }
    current == statement.post_root
}

/// The batch operator: sequential chaining of transition statements.
///
/// Requires post_root[k] = pre_root[k+1] for every adjacent pair; the
/// composite spans from the first pre-root to the last post-root and its
/// witness is the concatenation of the command lists.
pub fn batch_compose(
    statements: &[TransitionStatement],
) -> Result<TransitionStatement, RelationError> {
    let (first, rest) = statements.split_first().ok_or(RelationError::EmptyBatch)?;
    let mut composed = first.clone();
    for statement in rest {
        if statement.pre_root != composed.post_root {
            return Err(RelationError::BatchChainBroken);
        }
        composed.commands.extend(statement.commands.iter().cloned());
        composed.post_root = statement.post_root;
    }
    Ok(composed)
}

/// In-memory tree over 2^depth leaves; produces honest update commands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleTree {
    depth: usize,
    leaves: Vec<[u8; 32]>,
}

impl MerkleTree {
    /// Fresh tree of all-zero leaves. Depth is capped at 20 to keep the
    /// leaf vector allocatable.
    pub fn empty(depth: usize) -> Self {
        assert!(depth <= 20, "tree depth above simulation scale");
        MerkleTree { depth, leaves: alloc::vec![EMPTY_LEAF; 1usize << depth] }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaf(&self, index: u32) -> [u8; 32] {
        self.leaves[index as usize]
    }

    fn levels(&self) -> Vec<Vec<Digest>> {
        let mut levels = Vec::with_capacity(self.depth + 1);
        levels.push(self.leaves.iter().map(|l| Digest(*l)).collect::<Vec<_>>());
        let mut buf = [0u8; 64];
        while levels.last().unwrap().len() > 1 {
            let prev = levels.last().unwrap();
            let mut next = Vec::with_capacity(prev.len() / 2);
            for pair in prev.chunks_exact(2) {
                buf[..32].copy_from_slice(pair[0].as_bytes());
                buf[32..].copy_from_slice(pair[1].as_bytes());
                next.push(hash(DomainTag::Root, &buf));
            }
            levels.push(next);
        }
        levels
    }

    pub fn root(&self) -> StateRoot {
        StateRoot(self.levels().last().unwrap()[0])
    }

    /// Authentication path for a leaf slot, bottom level first.
    pub fn path(&self, index: u32) -> Vec<PathStep> {
        assert!((index as usize) < self.leaves.len(), "leaf index out of range");
        let levels = self.levels();
        let mut path = Vec::with_capacity(self.depth);
        let mut position = index as usize;
        for level in levels.iter().take(self.depth) {
            let (sibling_pos, side) = if position.is_multiple_of(2) {
                (position + 1, Side::Right)
            } else {
                (position - 1, Side::Left)
            };
            path.push(PathStep { sibling: level[sibling_pos], side });
            position /= 2;
        }
        path
    }

    /// Replace a leaf and return the honest update command for it.
    pub fn update(&mut self, index: u32, new_leaf: [u8; 32]) -> UpdateCommand {
        let old_leaf = self.leaf(index);
        let merkle_path = self.path(index);
        self.leaves[index as usize] = new_leaf;
        UpdateCommand { leaf_index: index, old_leaf, new_leaf, merkle_path }
    }
}

/// Relation 1: compressed-state Merkle transition.
///
/// Public values carry the pre and post roots under labels "pre" and
/// "post"; the witness is a canonical list of update commands chained
/// from the pre root to the post root.
#[derive(Debug, Clone, Copy)]
pub struct MerkleTransitionRelation {
    pub depth: usize,
}

impl MerkleTransitionRelation {
    pub fn new(depth: usize) -> Self {
        MerkleTransitionRelation { depth }
    }
}

impl Default for MerkleTransitionRelation {
    fn default() -> Self {
        MerkleTransitionRelation { depth: DEFAULT_TREE_DEPTH }
    }
}

/// Labels under which transition roots travel in public values.
pub const PRE_ROOT_LABEL: &str = "pre";
pub const POST_ROOT_LABEL: &str = "post";

fn root_from(pv: &ParamBundle, label: &str) -> Option<StateRoot> {
    let bytes: [u8; 32] = pv.get(label)?.try_into().ok()?;
    Some(StateRoot(Digest(bytes)))
}

impl Relation for MerkleTransitionRelation {
    fn check(&self, public_values: &ParamBundle, witness: &[u8]) -> bool {
        let Some(pre_root) = root_from(public_values, PRE_ROOT_LABEL) else {
            return false;
        };
        let Some(post_root) = root_from(public_values, POST_ROOT_LABEL) else {
            return false;
        };
        let Ok(commands) = decode_list::<UpdateCommand>(witness) else {
            return false;
        };
        if commands.is_empty() || commands.iter().any(|c| c.merkle_path.len() != self.depth) {
            return false;
        }
        check_transition(&TransitionStatement { pre_root, post_root, commands })
    }

    fn batchable(&self) -> bool {
        true
    }
}

/// Relation 2: demo preimage relation. Public value "h" must equal
/// `hash("commit", witness)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct HashPreimageRelation;

impl Relation for HashPreimageRelation {
    fn check(&self, public_values: &ParamBundle, witness: &[u8]) -> bool {
        public_values.get("h") == Some(hash(DomainTag::Commit, witness).as_bytes().as_slice())
    }
}

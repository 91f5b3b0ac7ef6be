//! Canonical byte encoding for all domain values.
//!
//! Every value that is hashed, committed to, signed, or carried across a
//! domain boundary goes through this one encoder. The format is fixed so
//! that digests are reproducible bit-for-bit:
//!
//! - every element is prefixed with a 1-octet type tag (see [`tags`]),
//! - integers are fixed-width little-endian,
//! - octet strings carry a 4-octet little-endian length prefix,
//! - tuples and lists carry a 4-octet little-endian element count, and
//!   each element is itself tagged,
//! - composite domain types write their own tag followed by their fields
//!   in declared order.
//!
//! Because every element is self-delimiting given its tag, decoding is
//! unambiguous and the encoding is injective on the abstract structure of
//! the value: distinct values never share an encoding.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Type tags. One octet, prefixed to every encoded element.
pub mod tags {
    pub const U32: u8 = 0x01;
    pub const U64: u8 = 0x02;
    pub const BYTES: u8 = 0x03;
    pub const TUPLE: u8 = 0x04;
    pub const LIST: u8 = 0x05;
    pub const PARAM_BUNDLE: u8 = 0x10;
    pub const DIGEST: u8 = 0x11;
    pub const IDENTIFIER: u8 = 0x12;
    pub const COMMITMENT: u8 = 0x13;
    pub const NULLIFIER: u8 = 0x14;
    pub const STATE_ROOT: u8 = 0x15;
    pub const MESSAGE: u8 = 0x16;
    pub const FINALITY_TAG: u8 = 0x17;
    pub const UPDATE_COMMAND: u8 = 0x18;
    pub const PATH_STEP: u8 = 0x19;
    pub const VK_ID: u8 = 0x1a;
    pub const TRANSCRIPT: u8 = 0x1b;
}

/// The canonical encoding of a domain value.
///
/// Only produced by [`encode`]; holding one is evidence the bytes came out
/// of the canonical encoder rather than an ad-hoc serializer.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CanonicalBytes(Vec<u8>);

impl CanonicalBytes {
    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }
}

impl AsRef<[u8]> for CanonicalBytes {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodeError {
    /// A length or element count exceeds 2^32 - 1.
    Overflow,
}

impl fmt::Display for EncodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EncodeError::Overflow => write!(f, "length exceeds 2^32 - 1 octets"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeError {
    /// Input ended before the element was complete.
    UnexpectedEnd,
    /// The type tag at the current position is not the expected one.
    TagMismatch { expected: u8, found: u8 },
    /// Input has bytes left over after the top-level value.
    TrailingBytes,
    /// A field holds a value outside its domain (bad enum code, bad length).
    InvalidValue,
    /// A ParamBundle carries two entries with the same label.
    DuplicateLabel,
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::UnexpectedEnd => write!(f, "input ended mid-element"),
            DecodeError::TagMismatch { expected, found } => {
                write!(f, "type tag mismatch: expected {expected:#04x}, found {found:#04x}")
            }
            DecodeError::TrailingBytes => write!(f, "trailing bytes after value"),
            DecodeError::InvalidValue => write!(f, "field value outside its domain"),
            DecodeError::DuplicateLabel => write!(f, "duplicate label in bundle"),
        }
    }
}

/// Types with a canonical encoding.
pub trait Encode {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError>;
}

/// Types reconstructible from their canonical encoding.
pub trait Decode: Sized {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError>;
}

/// Encode a value to canonical bytes.
pub fn encode<T: Encode + ?Sized>(value: &T) -> Result<CanonicalBytes, EncodeError> {
    let mut enc = Encoder::new();
    value.write(&mut enc)?;
    Ok(CanonicalBytes(enc.buf))
}

/// Decode a value from canonical bytes, requiring full consumption.
pub fn decode<T: Decode>(bytes: &[u8]) -> Result<T, DecodeError> {
    let mut dec = Decoder::new(bytes);
    let value = T::read(&mut dec)?;
    if dec.remaining() != 0 {
        return Err(DecodeError::TrailingBytes);
    }
    Ok(value)
}

/// Encode a slice as a canonical list.
pub fn encode_list<T: Encode>(items: &[T]) -> Result<CanonicalBytes, EncodeError> {
    let mut enc = Encoder::new();
    enc.put_list(items)?;
    Ok(CanonicalBytes(enc.buf))
}

/// Decode a canonical list, requiring full consumption.
pub fn decode_list<T: Decode>(bytes: &[u8]) -> Result<Vec<T>, DecodeError> {
    let mut dec = Decoder::new(bytes);
    let items = dec.get_list()?;
    if dec.remaining() != 0 {
        return Err(DecodeError::TrailingBytes);
    }
    Ok(items)
}

pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    fn new() -> Self {
        Encoder { buf: Vec::new() }
    }

    pub fn put_tag(&mut self, tag: u8) {
        self.buf.push(tag);
    }

    /// Raw 4-octet little-endian count, no tag. Used for list lengths,
    /// entry counts, and octet-string length prefixes.
    pub fn put_count(&mut self, n: usize) -> Result<(), EncodeError> {
        let n: u32 = n.try_into().map_err(|_| EncodeError::Overflow)?;
        self.buf.extend_from_slice(&n.to_le_bytes());
        Ok(())
    }

    pub fn put_u32(&mut self, v: u32) {
        self.put_tag(tags::U32);
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_u64(&mut self, v: u64) {
        self.put_tag(tags::U64);
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn put_bytes(&mut self, b: &[u8]) -> Result<(), EncodeError> {
        self.put_tag(tags::BYTES);
        self.put_count(b.len())?;
        self.buf.extend_from_slice(b);
        Ok(())
    }

    /// Fixed-width field with no length prefix (digests and other
    /// constant-size values whose tag already fixes the width).
    pub fn put_fixed(&mut self, tag: u8, bytes: &[u8]) {
        self.put_tag(tag);
        self.buf.extend_from_slice(bytes);
    }

    pub fn put_list<T: Encode>(&mut self, items: &[T]) -> Result<(), EncodeError> {
        self.put_tag(tags::LIST);
        self.put_count(items.len())?;
        for item in items {
            item.write(self)?;
        }
        Ok(())
    }
}

pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Decoder { buf, pos: 0 }
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], DecodeError> {
        if self.remaining() < n {
            return Err(DecodeError::UnexpectedEnd);
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn expect_tag(&mut self, expected: u8) -> Result<(), DecodeError> {
        let found = self.take(1)?[0];
        if found != expected {
            return Err(DecodeError::TagMismatch { expected, found });
        }
        Ok(())
    }

    pub fn get_count(&mut self) -> Result<u32, DecodeError> {
        let raw = self.take(4)?;
        Ok(u32::from_le_bytes(raw.try_into().unwrap()))
    }

    pub fn get_u32(&mut self) -> Result<u32, DecodeError> {
        self.expect_tag(tags::U32)?;
        let raw = self.take(4)?;
        Ok(u32::from_le_bytes(raw.try_into().unwrap()))
    }

    pub fn get_u64(&mut self) -> Result<u64, DecodeError> {
        self.expect_tag(tags::U64)?;
        let raw = self.take(8)?;
        Ok(u64::from_le_bytes(raw.try_into().unwrap()))
    }

    pub fn get_bytes(&mut self) -> Result<Vec<u8>, DecodeError> {
        self.expect_tag(tags::BYTES)?;
        let len = self.get_count()? as usize;
        Ok(self.take(len)?.to_vec())
    }

    pub fn get_fixed<const N: usize>(&mut self, tag: u8) -> Result<[u8; N], DecodeError> {
        self.expect_tag(tag)?;
        let raw = self.take(N)?;
        Ok(raw.try_into().unwrap())
    }

    pub fn get_list<T: Decode>(&mut self) -> Result<Vec<T>, DecodeError> {
        self.expect_tag(tags::LIST)?;
        let n = self.get_count()?;
        let mut out = Vec::new();
        for _ in 0..n {
            out.push(T::read(self)?);
        }
        Ok(out)
    }
}

impl Encode for u32 {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_u32(*self);
        Ok(())
    }
}

impl Decode for u32 {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        dec.get_u32()
    }
}

impl Encode for u64 {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_u64(*self);
        Ok(())
    }
}

impl Decode for u64 {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        dec.get_u64()
    }
}

impl Encode for [u8] {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_bytes(self)
    }
}

impl Encode for Vec<u8> {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_bytes(self)
    }
}

impl Decode for Vec<u8> {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        dec.get_bytes()
    }
}

macro_rules! impl_tuple_encode {
    ($count:expr; $($name:ident : $idx:tt),+) => {
        impl<$($name: Encode),+> Encode for ($($name,)+) {
            fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
                enc.put_tag(tags::TUPLE);
                enc.put_count($count)?;
                $(self.$idx.write(enc)?;)+
                Ok(())
            }
        }

        impl<$($name: Decode),+> Decode for ($($name,)+) {
            fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
                dec.expect_tag(tags::TUPLE)?;
                if dec.get_count()? as usize != $count {
                    return Err(DecodeError::InvalidValue);
                }
                Ok(($($name::read(dec)?,)+))
            }
        }
    };
}

impl_tuple_encode!(2; A: 0, B: 1);
impl_tuple_encode!(3; A: 0, B: 1, C: 2);
impl_tuple_encode!(4; A: 0, B: 1, C: 2, D: 3);

/// An ordered list of labelled octet-string parameters.
///
/// Labels are unique within a bundle and entry order is significant: two
/// bundles that differ only in order encode differently. This is the
/// container for commitment openings, router public values, and message
/// bodies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct ParamBundle {
    entries: Vec<(String, Vec<u8>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamBundleError {
    DuplicateLabel,
}

impl fmt::Display for ParamBundleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamBundleError::DuplicateLabel => write!(f, "duplicate label in bundle"),
        }
    }
}

impl ParamBundle {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append an entry. Fails if the label is already present.
    pub fn push(&mut self, label: &str, value: impl Into<Vec<u8>>) -> Result<(), ParamBundleError> {
        if self.get(label).is_some() {
            return Err(ParamBundleError::DuplicateLabel);
        }
        self.entries.push((String::from(label), value.into()));
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<&[u8]> {
        self.entries
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.as_slice())
    }

    /// Replace the value under an existing label, or append it.
    pub fn set(&mut self, label: &str, value: impl Into<Vec<u8>>) {
        if let Some(entry) = self.entries.iter_mut().find(|(l, _)| l == label) {
            entry.1 = value.into();
        } else {
            self.entries.push((String::from(label), value.into()));
        }
    }

    pub fn entries(&self) -> &[(String, Vec<u8>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Encode for ParamBundle {
    fn write(&self, enc: &mut Encoder) -> Result<(), EncodeError> {
        enc.put_tag(tags::PARAM_BUNDLE);
        enc.put_count(self.entries.len())?;
        for (label, value) in &self.entries {
            enc.put_bytes(label.as_bytes())?;
            enc.put_bytes(value)?;
        }
        Ok(())
    }
}

impl Decode for ParamBundle {
    fn read(dec: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        dec.expect_tag(tags::PARAM_BUNDLE)?;
        let n = dec.get_count()?;
        let mut entries: Vec<(String, Vec<u8>)> = Vec::new();
        for _ in 0..n {
            let label = String::from_utf8(dec.get_bytes()?)
                .map_err(|_| DecodeError::InvalidValue)?;
            let value = dec.get_bytes()?;
            if entries.iter().any(|(l, _)| *l == label) {
                return Err(DecodeError::DuplicateLabel);
            }
            entries.push((label, value));
        }
        Ok(ParamBundle { entries })
    }
}

//! Opaque pagination cursors.
//!
//! A cursor pins the source it was issued for (table version or result id),
//! a fingerprint of the filter, and the index of the next row to return.
//! Anything that does not decode, or decodes to a different source or
//! filter, is rejected as stale.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Cursor {
    pub source: u64,
    pub fingerprint: u64,
    pub offset: usize,
}

const PREFIX: &str = "bx1";

impl Cursor {
    pub fn encode(&self) -> String {
        format!("{PREFIX}.{:x}.{:x}.{:x}", self.source, self.fingerprint, self.offset)
    }

    pub fn decode(token: &str) -> Option<Cursor> {
        let mut parts = token.split('.');
        if parts.next()? != PREFIX {
            return None;
        }
        let source = u64::from_str_radix(parts.next()?, 16).ok()?;
        let fingerprint = u64::from_str_radix(parts.next()?, 16).ok()?;
        let offset = usize::from_str_radix(parts.next()?, 16).ok()?;
        if parts.next().is_some() {
            return None;
        }
        Some(Cursor { source, fingerprint, offset })
    }

    /// Decodes `token` and checks it belongs to (`source`, `fingerprint`) and
    /// points inside `len` rows. `None` means "start from the beginning".
    pub fn resume(token: Option<&str>, source: u64, fingerprint: u64, len: usize) -> Result<usize> {
        let Some(token) = token else { return Ok(0) };
        match Cursor::decode(token) {
            Some(c) if c.source == source && c.fingerprint == fingerprint && c.offset < len => {
                Ok(c.offset)
            }
            _ => Err(Error::StaleCursor),
        }
    }
}

/// FNV-1a, stable across builds and platforms.
pub(crate) fn fingerprint(text: &str) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

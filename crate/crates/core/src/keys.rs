//! Deriving the watermark positions from a compact key.
//!
//! `derive_indices` hashes the key and the derivation parameters with
//! SHA-256, expands the digest in counter mode into a stream of 64-bit
//! words, and uses that stream to drive a partial Fisher–Yates shuffle of the
//! eligible positions. The first `mark_count` shuffled positions, sorted, are
//! the index set.
//!
//! The byte layout hashed here is part of the secret-file format: changing
//! it changes every derived index set and must bump [`DERIVATION_VERSION`].

use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::qstate::{Basis, RandomSource};
use crate::watermark::WatermarkSecret;

pub const DERIVATION_VERSION: u32 = 1;
pub const MIN_KEY_BYTES: usize = 16;
pub const DEFAULT_KEY_BYTES: usize = 32;

const DOMAIN: &[u8] = b"qumark/derive-indices/v1";

/// The key `K`. At least 128 bits.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey(Vec<u8>);

impl SecretKey {
    pub fn new(bytes: Vec<u8>) -> Result<Self> {
        if bytes.len() < MIN_KEY_BYTES {
            return Err(Error::KeyTooShort {
                got: bytes.len(),
                min: MIN_KEY_BYTES,
            });
        }
        Ok(SecretKey(bytes))
    }

    /// A fresh 256-bit key from `rng`.
    pub fn generate(rng: &mut RandomSource) -> Self {
        let mut bytes = vec![0u8; DEFAULT_KEY_BYTES];
        rng.fill_bytes(&mut bytes);
        SecretKey(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SecretKey(<{} bytes>)", self.0.len())
    }
}

/// The domain of the derivation: which positions exist and which of them
/// may carry the watermark.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivationParams {
    message_length: usize,
    mark_count: usize,
    eligibility_mask: Option<Vec<bool>>,
}

impl DerivationParams {
    pub fn new(
        message_length: usize,
        mark_count: usize,
        eligibility_mask: Option<Vec<bool>>,
    ) -> Result<Self> {
        if message_length == 0 {
            return Err(Error::InvalidDerivation("message length must be positive"));
        }
        if mark_count == 0 {
            return Err(Error::InvalidDerivation("mark count must be positive"));
        }
        if let Some(mask) = &eligibility_mask {
            if mask.len() != message_length {
                return Err(Error::LengthMismatch {
                    left: mask.len(),
                    right: message_length,
                });
            }
        }
        Ok(DerivationParams {
            message_length,
            mark_count,
            eligibility_mask,
        })
    }

    pub fn message_length(&self) -> usize {
        self.message_length
    }

    pub fn mark_count(&self) -> usize {
        self.mark_count
    }

    pub fn eligibility_mask(&self) -> Option<&[bool]> {
        self.eligibility_mask.as_deref()
    }

    fn eligible_positions(&self) -> Vec<usize> {
        match &self.eligibility_mask {
            Some(mask) => mask
                .iter()
                .enumerate()
                .filter_map(|(i, &ok)| ok.then_some(i))
                .collect(),
            None => (0..self.message_length).collect(),
        }
    }
}

/// Counter-mode SHA-256 expansion of a seed into 64-bit words.
struct KeyStream {
    seed: [u8; 32],
    counter: u64,
    block: [u8; 32],
    offset: usize,
}

impl KeyStream {
    fn new(seed: [u8; 32]) -> Self {
        KeyStream {
            seed,
            counter: 0,
            block: [0; 32],
            offset: 32,
        }
    }

    fn next_u64(&mut self) -> u64 {
        if self.offset == 32 {
            let mut h = Sha256::new();
            h.update(self.seed);
            h.update(self.counter.to_le_bytes());
            self.block.copy_from_slice(&h.finalize());
            self.counter += 1;
            self.offset = 0;
        }
        let word = u64::from_le_bytes(self.block[self.offset..self.offset + 8].try_into().unwrap());
        self.offset += 8;
        word
    }

    /// Uniform in `0..bound` by rejection (no modulo bias).
    fn below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % bound;
            }
        }
    }
}

fn derivation_seed(key: &SecretKey, params: &DerivationParams) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(DOMAIN);
    h.update((key.0.len() as u64).to_le_bytes());
    h.update(&key.0);
    h.update((params.message_length as u64).to_le_bytes());
    h.update((params.mark_count as u64).to_le_bytes());
    match &params.eligibility_mask {
        None => h.update([0u8]),
        Some(mask) => {
            h.update([1u8]);
            let mut packed = vec![0u8; mask.len().div_ceil(8)];
            for (i, &bit) in mask.iter().enumerate() {
                if bit {
                    packed[i / 8] |= 0x80 >> (i % 8);
                }
            }
            h.update(&packed);
        }
    }
    h.finalize().into()
}

/// `f: K -> I`. Deterministic in `(key, params)`; returns exactly
/// `mark_count` distinct, sorted, eligible positions.
pub fn derive_indices(key: &SecretKey, params: &DerivationParams) -> Result<Vec<usize>> {
    let mut pool = params.eligible_positions();
    let need = params.mark_count;
    if need > pool.len() {
        return Err(Error::TooFewEligiblePositions {
            need,
            have: pool.len(),
        });
    }
    let mut stream = KeyStream::new(derivation_seed(key, params));
    let n = pool.len();
    for t in 0..need {
        let j = t + stream.below((n - t) as u64) as usize;
        pool.swap(t, j);
    }
    pool.truncate(need);
    pool.sort_unstable();
    Ok(pool)
}

/// Derives `I` from `key` and packages it with the mark basis.
pub fn generate_secret(
    key: &SecretKey,
    params: &DerivationParams,
    mark_basis: Basis,
) -> Result<WatermarkSecret> {
    let indices = derive_indices(key, params)?;
    WatermarkSecret::new(indices, mark_basis, Some(key.0.clone()))
}

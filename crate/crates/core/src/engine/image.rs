//! Binary program image.
//!
//! All integers are little-endian. With `words = ceil(N / 64)`:
//!
//! | offset | size            | field                                          |
//! |--------|-----------------|------------------------------------------------|
//! | 0      | 4               | magic `RAPI`                                   |
//! | 4      | 2               | version, currently 1                           |
//! | 6      | 2               | flags; bit 0 set = all-input start mode        |
//! | 8      | 4               | `W`, symbol width in bits                      |
//! | 12     | 4               | `N`, number of states                          |
//! | 16     | 8·words·2^W     | `V`, one row per symbol                        |
//! | ...    | 8·words·N       | `R`, one row per source state                  |
//! | ...    | 8·words         | accept vector `c`                              |
//! | ...    | 8·words         | initial active vector                          |
//!
//! Each row is `words` u64 values; bit `n` of a row is bit `n % 64` of word
//! `n / 64`. Bits past `N` in the last word must be zero.

use thiserror::Error;

use crate::automata::{StartMode, MAX_SYMBOL_BITS};
use crate::bits::{words_for, BitVector};

use super::{ApProgram, DEFAULT_MAX_STATES};

pub const IMAGE_MAGIC: [u8; 4] = *b"RAPI";
pub const IMAGE_VERSION: u16 = 1;
const HEADER_LEN: usize = 16;
const FLAG_ALL_INPUT: u16 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImageError {
    #[error("bad magic {0:02x?}, not a program image")]
    BadMagic([u8; 4]),
    #[error("unsupported image version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown flag bits {0:#06x}")]
    UnknownFlags(u16),
    #[error("symbol width {0} is outside 1..={MAX_SYMBOL_BITS}")]
    InvalidSymbolBits(u32),
    #[error("state count {0} is outside 1..={DEFAULT_MAX_STATES}")]
    InvalidStateCount(u32),
    #[error("image is {found} bytes, expected {expected}")]
    WrongLength { expected: usize, found: usize },
    #[error("non-zero padding bits in {0}")]
    DirtyPadding(&'static str),
}

impl ApProgram {
    pub fn image_len(&self) -> usize {
        image_len(self.symbol_bits, self.num_states)
    }

    pub fn to_image(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.image_len());
        out.extend_from_slice(&IMAGE_MAGIC);
        out.extend_from_slice(&IMAGE_VERSION.to_le_bytes());
        let flags = match self.start_mode {
            StartMode::StartOfData => 0,
            StartMode::AllInput => FLAG_ALL_INPUT,
        };
        out.extend_from_slice(&flags.to_le_bytes());
        out.extend_from_slice(&self.symbol_bits.to_le_bytes());
        out.extend_from_slice(&(self.num_states as u32).to_le_bytes());
        let words = self
            .ste
            .iter()
            .chain(&self.routing)
            .chain(self.accept.words())
            .chain(self.initial.words());
        for w in words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_image(bytes: &[u8]) -> Result<Self, ImageError> {
        if bytes.len() < HEADER_LEN {
            return Err(ImageError::WrongLength {
                expected: HEADER_LEN,
                found: bytes.len(),
            });
        }
        let magic: [u8; 4] = bytes[0..4].try_into().expect("4 bytes");
        if magic != IMAGE_MAGIC {
            return Err(ImageError::BadMagic(magic));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != IMAGE_VERSION {
            return Err(ImageError::UnsupportedVersion(version));
        }
        let flags = u16::from_le_bytes([bytes[6], bytes[7]]);
        if flags & !FLAG_ALL_INPUT != 0 {
            return Err(ImageError::UnknownFlags(flags & !FLAG_ALL_INPUT));
        }
        let bits = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if !(1..=MAX_SYMBOL_BITS).contains(&bits) {
            return Err(ImageError::InvalidSymbolBits(bits));
        }
        let n_raw = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes"));
        if n_raw == 0 || n_raw as usize > DEFAULT_MAX_STATES {
            return Err(ImageError::InvalidStateCount(n_raw));
        }
        let n = n_raw as usize;
        let expected = image_len(bits, n);
        if bytes.len() != expected {
            return Err(ImageError::WrongLength {
                expected,
                found: bytes.len(),
            });
        }

        let wpr = words_for(n);
        let mut words = bytes[HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")));
        let mut take_rows = |rows: usize, what: &'static str| -> Result<Vec<u64>, ImageError> {
            let mut out = Vec::with_capacity(rows * wpr);
            for _ in 0..rows {
                let row: Vec<u64> = words.by_ref().take(wpr).collect();
                BitVector::from_words(n, row.clone()).ok_or(ImageError::DirtyPadding(what))?;
                out.extend(row);
            }
            Ok(out)
        };
        let ste = take_rows(1 << bits, "STE matrix")?;
        let routing = take_rows(n, "routing matrix")?;
        let accept = take_rows(1, "accept vector")?;
        let initial = take_rows(1, "initial vector")?;
        Ok(ApProgram {
            symbol_bits: bits,
            num_states: n,
            words_per_row: wpr,
            ste,
            routing,
            accept: BitVector::from_words(n, accept).expect("validated"),
            initial: BitVector::from_words(n, initial).expect("validated"),
            start_mode: if flags & FLAG_ALL_INPUT != 0 {
                StartMode::AllInput
            } else {
                StartMode::StartOfData
            },
        })
    }
}

fn image_len(bits: u32, n: usize) -> usize {
    HEADER_LEN + 8 * words_for(n) * ((1usize << bits) + n + 2)
}

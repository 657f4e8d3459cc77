//! Fixed-width packed bit vectors.
//!
//! A [`BitVector`] stores `len` bits in little-endian 64-bit words: bit `i`
//! lives in word `i / 64` at position `i % 64`. Bits at positions `>= len`
//! in the last word are always zero, so word-level equality, hashing and
//! population counts never see garbage.

use std::fmt;

pub(crate) const WORD_BITS: usize = 64;

/// Number of 64-bit words needed to hold `len` bits.
#[inline]
pub fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Mask of the valid bits in the last word of a `len`-bit vector.
#[inline]
pub(crate) fn tail_mask(len: usize) -> u64 {
    match len % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![u64::MAX; words_for(len)],
        };
        v.canonicalize();
        v
    }

    /// Builds a vector from bools, index 0 first.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for b in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if b {
                words[len / WORD_BITS] |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        BitVector { len, words }
    }

    /// Builds a `len`-bit vector with the given positions set.
    ///
    /// Panics if any index is out of range.
    pub fn from_indices<I: IntoIterator<Item = usize>>(len: usize, indices: I) -> Self {
        let mut v = BitVector::zeros(len);
        for i in indices {
            v.set(i, true);
        }
        v
    }

    /// Wraps raw words. Returns `None` if the word count is wrong or any
    /// bit past `len` is set.
    pub fn from_words(len: usize, words: Vec<u64>) -> Option<Self> {
        if words.len() != words_for(len) {
            return None;
        }
        if let Some(last) = words.last() {
            if last & !tail_mask(len) != 0 {
                return None;
            }
        }
        Some(BitVector { len, words })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// True iff `self AND other` has at least one set bit.
    pub fn intersects(&self, other: &BitVector) -> bool {
        self.check_len(other);
        self.words
            .iter()
            .zip(&other.words)
            .any(|(a, b)| a & b != 0)
    }

    /// True iff every set bit of `self` is also set in `other`.
    pub fn is_subset(&self, other: &BitVector) -> bool {
        self.check_len(other);
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }

    pub fn and(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.and_assign(other);
        out
    }

    pub fn or(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.or_assign(other);
        out
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        self.check_len(other);
        let words = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| a ^ b)
            .collect();
        BitVector {
            len: self.len,
            words,
        }
    }

    pub fn and_assign(&mut self, other: &BitVector) {
        self.check_len(other);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn or_assign(&mut self, other: &BitVector) {
        self.check_len(other);
        or_words(&mut self.words, &other.words);
    }

    /// Positions of set bits in increasing order.
    pub fn iter_ones(&self) -> Ones<'_> {
        Ones {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    fn canonicalize(&mut self) {
        let mask = tail_mask(self.len);
        if let Some(last) = self.words.last_mut() {
            *last &= mask;
        }
    }

    #[inline]
    fn check_len(&self, other: &BitVector) {
        assert_eq!(
            self.len, other.len,
            "bit vector length mismatch: {} vs {}",
            self.len, other.len
        );
    }
}

#[inline]
pub(crate) fn or_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d |= s;
    }
}

pub struct Ones<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Ones<'_> {
    type Item = usize;

    #[inline]
    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * WORD_BITS + bit);
            }
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// Renders as `[1 0 1]`, index 0 first.
impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.len {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ones_is_canonical() {
        for len in [0, 1, 63, 64, 65, 130] {
            let v = BitVector::ones(len);
            assert_eq!(v.count_ones(), len);
            assert_eq!(BitVector::from_words(len, v.words().to_vec()), Some(v));
        }
    }

    #[test]
    fn from_words_rejects_padding() {
        assert!(BitVector::from_words(3, vec![0b1000]).is_none());
        assert!(BitVector::from_words(3, vec![0b111, 0]).is_none());
        assert!(BitVector::from_words(3, vec![0b101]).is_some());
    }

    #[test]
    fn display_matches_vector_notation() {
        let v = BitVector::from_bits([true, false, true]);
        assert_eq!(v.to_string(), "[1 0 1]");
    }

    #[test]
    #[should_panic(expected = "length mismatch")]
    fn mismatched_lengths_panic() {
        let _ = BitVector::zeros(3).and(&BitVector::zeros(4));
    }

    fn bits() -> impl Strategy<Value = Vec<bool>> {
        prop::collection::vec(any::<bool>(), 0..300)
    }

    proptest! {
        #[test]
        fn ops_agree_with_bool_vectors(a in bits(), seed in any::<u64>()) {
            let b: Vec<bool> = a
                .iter()
                .enumerate()
                .map(|(i, _)| (seed.rotate_left(i as u32 % 64) ^ i as u64) & 1 == 1)
                .collect();
            let va = BitVector::from_bits(a.iter().copied());
            let vb = BitVector::from_bits(b.iter().copied());
            let and: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x && *y).collect();
            let or: Vec<bool> = a.iter().zip(&b).map(|(x, y)| *x || *y).collect();
            prop_assert_eq!(va.and(&vb).iter().collect::<Vec<_>>(), and.clone());
            prop_assert_eq!(va.or(&vb).iter().collect::<Vec<_>>(), or);
            prop_assert_eq!(va.intersects(&vb), and.iter().any(|x| *x));
            let ones: Vec<usize> = a.iter().enumerate().filter(|(_, x)| **x).map(|(i, _)| i).collect();
            prop_assert_eq!(va.iter_ones().collect::<Vec<_>>(), ones);
        }
    }
}

//! Fixed-length bit strings and Hamming-space geometry.
//!
//! A [`BitString`] is an immutable value of 1..=64 bits; bit `i` is the
//! 2^i place of the underlying word. The textual form writes the
//! most-significant bit first, so `"0010"` is the 4-bit string with only
//! bit 1 set. Codewords for a block of `k` slots of `n` bits are
//! `n * k`-bit strings, which keeps everything within one machine word at
//! desk scale.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::comb::binomial;

/// Hard upper bound on bit-string length; `n * k <= 64` everywhere.
pub const MAX_BITS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BitError {
    #[error("bit-string length must be between 1 and {MAX_BITS}, got {0}")]
    BadLength(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("value {value:#x} does not fit in {len} bits")]
    ValueTooWide { value: u64, len: usize },
    #[error("radius {radius} exceeds length {len}")]
    RadiusTooLarge { radius: usize, len: usize },
    #[error("invalid character {0:?} in bit-string, expected '0' or '1'")]
    BadCharacter(char),
    #[error("refusing to enumerate all 2^{0} strings")]
    EnumerationTooWide(usize),
}

/// A fixed-length string of bits, at most [`MAX_BITS`] long.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString {
    len: u8,
    bits: u64,
}

impl BitString {
    /// The all-zero string of the given length.
    pub fn zeros(len: usize) -> Result<Self, BitError> {
        if len == 0 || len > MAX_BITS {
            return Err(BitError::BadLength(len));
        }
        Ok(BitString { len: len as u8, bits: 0 })
    }

    /// Builds a string from an integer value; errors if the value needs
    /// more than `len` bits.
    pub fn from_value(value: u64, len: usize) -> Result<Self, BitError> {
        if len == 0 || len > MAX_BITS {
            return Err(BitError::BadLength(len));
        }
        if len < MAX_BITS && value >> len != 0 {
            return Err(BitError::ValueTooWide { value, len });
        }
        Ok(BitString { len: len as u8, bits: value })
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        false // length is always >= 1
    }

    /// The underlying word; bits above `len` are zero.
    pub fn value(&self) -> u64 {
        self.bits
    }

    /// Bit `i` (the 2^i place). Panics if `i >= len`.
    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.len(), "bit index {i} out of range for length {}", self.len);
        self.bits >> i & 1 == 1
    }

    /// Copy with bit `i` set to `value`. Panics if `i >= len`.
    pub fn with_bit(&self, i: usize, value: bool) -> Self {
        assert!(i < self.len(), "bit index {i} out of range for length {}", self.len);
        let bits = if value { self.bits | 1 << i } else { self.bits & !(1 << i) };
        BitString { len: self.len, bits }
    }

    /// Copy with bit `i` flipped. Panics if `i >= len`.
    pub fn flipped(&self, i: usize) -> Self {
        assert!(i < self.len(), "bit index {i} out of range for length {}", self.len);
        BitString { len: self.len, bits: self.bits ^ (1 << i) }
    }

    /// Bitwise xor of two equal-length strings.
    pub fn xor(&self, other: &Self) -> Result<Self, BitError> {
        if self.len != other.len {
            return Err(BitError::LengthMismatch(self.len(), other.len()));
        }
        Ok(BitString { len: self.len, bits: self.bits ^ other.bits })
    }

    /// Number of set bits.
    pub fn weight(&self) -> u32 {
        self.bits.count_ones()
    }

    /// All strings of the given length, in increasing value order.
    pub fn all(len: usize) -> Result<impl Iterator<Item = BitString>, BitError> {
        if len == 0 || len > MAX_BITS {
            return Err(BitError::BadLength(len));
        }
        if len > 32 {
            // iterating 2^len values is not a desk-scale operation
            return Err(BitError::EnumerationTooWide(len));
        }
        Ok((0u64..1 << len).map(move |v| BitString { len: len as u8, bits: v }))
    }
}

/// Number of bit flips needed to turn `a` into `b`: the weight of `a ^ b`.
pub fn hamming_distance(a: &BitString, b: &BitString) -> Result<u32, BitError> {
    Ok(a.xor(b)?.weight())
}

/// Number of strings of the given length within Hamming distance `radius`
/// of any fixed center, the center included: sum of C(length, i) for
/// i = 0..=radius.
pub fn ball_size(length: usize, radius: usize) -> Result<u128, BitError> {
    if length == 0 || length > MAX_BITS {
        return Err(BitError::BadLength(length));
    }
    if radius > length {
        return Err(BitError::RadiusTooLarge { radius, len: length });
    }
    let mut total: u128 = 0;
    for i in 0..=radius {
        total += binomial(length as u128, i as u128).expect("within u128 range for length <= 64");
    }
    Ok(total)
}

/// Every string at Hamming distance <= `radius` from `center`, each exactly
/// once, the center first. The result has exactly
/// [`ball_size`]`(center.len(), radius)` elements.
pub fn enumerate_ball(center: &BitString, radius: usize) -> Result<Vec<BitString>, BitError> {
    let len = center.len();
    if radius > len {
        return Err(BitError::RadiusTooLarge { radius, len });
    }
    let total = ball_size(len, radius)?;
    let mut out = Vec::with_capacity(total as usize);
    out.push(*center);
    for d in 1..=radius {
        // walk all d-subsets of bit positions in lexicographic order
        let mut idx: Vec<usize> = (0..d).collect();
        'subsets: loop {
            let mut flipped = *center;
            for &i in &idx {
                flipped = flipped.flipped(i);
            }
            out.push(flipped);
            // rightmost index that can still move up
            let mut pos = d as isize - 1;
            while pos >= 0 && idx[pos as usize] == len - d + pos as usize {
                pos -= 1;
            }
            if pos < 0 {
                break 'subsets;
            }
            let pos = pos as usize;
            idx[pos] += 1;
            for j in pos + 1..d {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    Ok(out)
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.len()).rev() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = BitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.chars().collect();
        if chars.is_empty() || chars.len() > MAX_BITS {
            return Err(BitError::BadLength(chars.len()));
        }
        let mut bits: u64 = 0;
        for &c in &chars {
            bits <<= 1;
            match c {
                '0' => {}
                '1' => bits |= 1,
                other => return Err(BitError::BadCharacter(other)),
            }
        }
        Ok(BitString { len: chars.len() as u8, bits })
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    #[test]
    fn display_is_msb_first() {
        assert_eq!(BitString::from_value(0b0010, 4).unwrap().to_string(), "0010");
        assert_eq!(bs("0010").value(), 2);
        assert_eq!(bs("0101").value(), 5);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert_eq!("".parse::<BitString>(), Err(BitError::BadLength(0)));
        assert_eq!("01x".parse::<BitString>(), Err(BitError::BadCharacter('x')));
        assert!("0".repeat(65).parse::<BitString>().is_err());
    }

    #[test]
    fn hamming_distance_examples() {
        assert_eq!(hamming_distance(&bs("0000"), &bs("0000")).unwrap(), 0);
        assert_eq!(hamming_distance(&bs("10110"), &bs("01001")).unwrap(), 5);
        assert_eq!(hamming_distance(&bs("1100"), &bs("1010")).unwrap(), 2);
        assert!(matches!(
            hamming_distance(&bs("00"), &bs("000")),
            Err(BitError::LengthMismatch(2, 3))
        ));
    }

    #[test]
    fn ball_size_examples() {
        // 136 neighbors within distance 2 of a 16-bit string, plus the center
        assert_eq!(ball_size(16, 2).unwrap(), 137);
        assert_eq!(ball_size(16, 2).unwrap() - 1, 136);
        for len in 1..=64 {
            assert_eq!(ball_size(len, 0).unwrap(), 1);
        }
        assert_eq!(ball_size(3, 3).unwrap(), 8);
        assert!(matches!(ball_size(4, 5), Err(BitError::RadiusTooLarge { .. })));
    }

    #[test]
    fn enumerate_ball_examples() {
        let got = enumerate_ball(&bs("00"), 1).unwrap();
        let want: Vec<BitString> = vec![bs("00"), bs("01"), bs("10")];
        assert_eq!(got.len(), 3);
        for w in want {
            assert!(got.contains(&w));
        }

        let center = BitString::zeros(16).unwrap();
        assert_eq!(enumerate_ball(&center, 2).unwrap().len(), 137);

        assert_eq!(enumerate_ball(&bs("1011"), 0).unwrap(), vec![bs("1011")]);
    }

    #[test]
    fn ball_enumeration_matches_ball_size_exhaustively() {
        for len in 1..=10usize {
            let center = BitString::from_value(0x2a5 & ((1 << len) - 1), len).unwrap();
            for radius in 0..=len {
                let ball = enumerate_ball(&center, radius).unwrap();
                assert_eq!(ball.len() as u128, ball_size(len, radius).unwrap());
                let dedup: std::collections::BTreeSet<_> = ball.iter().collect();
                assert_eq!(dedup.len(), ball.len(), "duplicates at len={len} r={radius}");
                for b in &ball {
                    assert!(hamming_distance(&center, b).unwrap() as usize <= radius);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn distance_is_symmetric(a in 0u64..1024, b in 0u64..1024) {
            let a = BitString::from_value(a, 10).unwrap();
            let b = BitString::from_value(b, 10).unwrap();
            prop_assert_eq!(
                hamming_distance(&a, &b).unwrap(),
                hamming_distance(&b, &a).unwrap()
            );
        }

        #[test]
        fn triangle_inequality(a in 0u64..4096, b in 0u64..4096, c in 0u64..4096) {
            let a = BitString::from_value(a, 12).unwrap();
            let b = BitString::from_value(b, 12).unwrap();
            let c = BitString::from_value(c, 12).unwrap();
            let ab = hamming_distance(&a, &b).unwrap();
            let bc = hamming_distance(&b, &c).unwrap();
            let ac = hamming_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc);
        }

        #[test]
        fn distance_to_xored_is_weight(a in any::<u64>(), e in any::<u64>()) {
            let a = BitString::from_value(a, 64).unwrap();
            let e = BitString::from_value(e, 64).unwrap();
            let shifted = a.xor(&e).unwrap();
            prop_assert_eq!(hamming_distance(&a, &shifted).unwrap(), e.weight());
        }

        #[test]
        fn display_parse_roundtrip(v in any::<u64>(), len in 1usize..=64) {
            let v = if len == 64 { v } else { v & ((1 << len) - 1) };
            let b = BitString::from_value(v, len).unwrap();
            let back: BitString = b.to_string().parse().unwrap();
            prop_assert_eq!(b, back);
        }
    }
}

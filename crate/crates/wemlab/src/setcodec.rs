//! Ranking and unranking of sets and multisets over the slot alphabet, and
//! the compressed code built from ranks.
//!
//! The order is size-ascending, then colexicographic within a size, which
//! gives the combinatorial number system's closed form: the set
//! `{a_1 < ... < a_m}` ranks at `sum C(a_j, j)` within its size class. A
//! multiset ranks through the standard strictly-increasing shift
//! `b_j = a_j + j - 1`. Ranks are dense, so writing a rank in binary packs
//! a collection state into `ceil(log2(total))` bits; whatever is left of
//! the `n * k` block is redundancy that multi-codeword search can spend.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitspace::{BitError, BitString};
use crate::blockmodel::{
    count_states, enumerate_states, BlockShape, BlockState, MemoryModel, ModelError,
};
use crate::codecraft::{Code, StateSpace};
use crate::comb::{binomial, multichoose};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bits(#[from] BitError),
    #[error("duplicate value {0} in a set")]
    DuplicateValue(u64),
    #[error("value {value} does not fit in {n}-bit slots")]
    ValueOutOfRange { value: u64, n: u32 },
    #[error("{got} values exceed the block capacity k={k}")]
    TooManyValues { got: usize, k: u32 },
    #[error("rank {rank} out of range, total is {total}")]
    RankOutOfRange { rank: u128, total: u128 },
    #[error("ranked codecs require a local-order-agnostic model, got {0}")]
    NeedsLoa(String),
    #[error("{total} states need {need} bits, more than the n*k = {have} available")]
    NoRoom { total: u128, need: u32, have: usize },
    #[error("count overflows 128-bit arithmetic")]
    Overflow,
}

fn check_values(
    values: &[u64],
    shape: BlockShape,
    require_distinct: bool,
) -> Result<Vec<u64>, CodecError> {
    if values.len() > shape.k() as usize {
        return Err(CodecError::TooManyValues { got: values.len(), k: shape.k() });
    }
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    for pair in sorted.windows(2) {
        if require_distinct && pair[0] == pair[1] {
            return Err(CodecError::DuplicateValue(pair[0]));
        }
    }
    for &v in &sorted {
        if v > shape.max_value() {
            return Err(CodecError::ValueOutOfRange { value: v, n: shape.n() });
        }
    }
    Ok(sorted)
}

/// Rank of a set of values below `2^n`, bijective onto
/// `[0, sum_i C(2^n, i))` for sizes `i = 0..=k`.
pub fn rank_set(values: &[u64], shape: BlockShape) -> Result<u128, CodecError> {
    let sorted = check_values(values, shape, true)?;
    let a = shape.alphabet();
    let mut rank: u128 = 0;
    for i in 0..sorted.len() {
        rank = rank
            .checked_add(binomial(a, i as u128).ok_or(CodecError::Overflow)?)
            .ok_or(CodecError::Overflow)?;
    }
    for (idx, &v) in sorted.iter().enumerate() {
        rank = rank
            .checked_add(binomial(v as u128, idx as u128 + 1).ok_or(CodecError::Overflow)?)
            .ok_or(CodecError::Overflow)?;
    }
    Ok(rank)
}

/// Inverse of [`rank_set`]: returns the set in increasing order.
pub fn unrank_set(rank: u128, shape: BlockShape) -> Result<Vec<u64>, CodecError> {
    let a = shape.alphabet();
    let total = set_total(shape)?;
    if rank >= total {
        return Err(CodecError::RankOutOfRange { rank, total });
    }
    let mut remaining = rank;
    let mut size = 0usize;
    loop {
        let block = binomial(a, size as u128).ok_or(CodecError::Overflow)?;
        if remaining < block {
            break;
        }
        remaining -= block;
        size += 1;
    }
    let mut out = vec![0u64; size];
    let mut hi = a; // exclusive upper bound on the next (largest) element
    for j in (1..=size).rev() {
        let v = largest_with(|x| binomial(x, j as u128), remaining, hi)?;
        out[j - 1] = v as u64;
        remaining -= binomial(v, j as u128).ok_or(CodecError::Overflow)?;
        hi = v;
    }
    debug_assert_eq!(remaining, 0);
    Ok(out)
}

/// Rank of a multiset of values below `2^n`, bijective onto
/// `[0, sum_i ((2^n, i)))` for sizes `i = 0..=k`.
pub fn rank_multiset(values: &[u64], shape: BlockShape) -> Result<u128, CodecError> {
    let sorted = check_values(values, shape, false)?;
    let a = shape.alphabet();
    let mut rank: u128 = 0;
    for i in 0..sorted.len() {
        rank = rank
            .checked_add(multichoose(a, i as u128).ok_or(CodecError::Overflow)?)
            .ok_or(CodecError::Overflow)?;
    }
    // shift to a strictly increasing sequence and rank that
    for (idx, &v) in sorted.iter().enumerate() {
        let shifted = v as u128 + idx as u128;
        rank = rank
            .checked_add(binomial(shifted, idx as u128 + 1).ok_or(CodecError::Overflow)?)
            .ok_or(CodecError::Overflow)?;
    }
    Ok(rank)
}

/// Inverse of [`rank_multiset`]: returns the multiset in non-decreasing
/// order.
pub fn unrank_multiset(rank: u128, shape: BlockShape) -> Result<Vec<u64>, CodecError> {
    let a = shape.alphabet();
    let total = multiset_total(shape)?;
    if rank >= total {
        return Err(CodecError::RankOutOfRange { rank, total });
    }
    let mut remaining = rank;
    let mut size = 0usize;
    loop {
        let block = multichoose(a, size as u128).ok_or(CodecError::Overflow)?;
        if remaining < block {
            break;
        }
        remaining -= block;
        size += 1;
    }
    let mut out = vec![0u64; size];
    let mut hi = a + size as u128 - if size == 0 { 0 } else { 1 };
    for j in (1..=size).rev() {
        let b = largest_with(|x| binomial(x, j as u128), remaining, hi)?;
        remaining -= binomial(b, j as u128).ok_or(CodecError::Overflow)?;
        out[j - 1] = (b - (j as u128 - 1)) as u64;
        hi = b;
    }
    debug_assert_eq!(remaining, 0);
    Ok(out)
}

/// Largest x < hi with f(x) <= target (f monotone non-decreasing;
/// overflow counts as "too big").
fn largest_with(
    f: impl Fn(u128) -> Option<u128>,
    target: u128,
    hi: u128,
) -> Result<u128, CodecError> {
    let fits = |x: u128| matches!(f(x), Some(v) if v <= target);
    let mut lo = 0u128; // f(j-1 choose j) = 0 <= target always holds at x = 0
    if !fits(lo) {
        return Err(CodecError::Overflow);
    }
    let mut hi = hi;
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn set_total(shape: BlockShape) -> Result<u128, CodecError> {
    let mut total: u128 = 0;
    for i in 0..=shape.k() as u128 {
        total = total
            .checked_add(binomial(shape.alphabet(), i).ok_or(CodecError::Overflow)?)
            .ok_or(CodecError::Overflow)?;
    }
    Ok(total)
}

fn multiset_total(shape: BlockShape) -> Result<u128, CodecError> {
    let mut total: u128 = 0;
    for i in 0..=shape.k() as u128 {
        total = total
            .checked_add(multichoose(shape.alphabet(), i).ok_or(CodecError::Overflow)?)
            .ok_or(CodecError::Overflow)?;
    }
    Ok(total)
}

/// A rank-based codec for the collection states of an order-agnostic
/// model: `total` states pack into `payload_bits`, leaving
/// `redundancy_bits` of the block unused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedCodec {
    shape: BlockShape,
    model: MemoryModel,
    total: u128,
    payload_bits: u32,
    redundancy_bits: u32,
}

impl RankedCodec {
    /// Errors unless the model has LOA, and unless the states actually fit
    /// in `n * k` bits (with NULL an ordinary ranked symbol, tiny shapes
    /// can have more collection states than bit strings).
    pub fn new(shape: BlockShape, model: MemoryModel) -> Result<Self, CodecError> {
        if !model.loa {
            return Err(CodecError::NeedsLoa(model.to_string()));
        }
        let total = count_states(shape, model)?;
        let payload_bits = (128 - (total - 1).leading_zeros()).max(1);
        let have = shape.total_bits();
        if payload_bits as usize > have {
            return Err(CodecError::NoRoom { total, need: payload_bits, have });
        }
        Ok(RankedCodec {
            shape,
            model,
            total,
            payload_bits,
            redundancy_bits: have as u32 - payload_bits,
        })
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn model(&self) -> MemoryModel {
        self.model
    }

    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn payload_bits(&self) -> u32 {
        self.payload_bits
    }

    pub fn redundancy_bits(&self) -> u32 {
        self.redundancy_bits
    }

    /// Rank of a canonical collection state (sets when the model has UoE,
    /// multisets otherwise).
    pub fn rank(&self, state: &BlockState) -> Result<u128, CodecError> {
        if self.model.uoe {
            rank_set(state.slots(), self.shape)
        } else {
            rank_multiset(state.slots(), self.shape)
        }
    }

    pub fn unrank(&self, rank: u128) -> Result<BlockState, CodecError> {
        let values = if self.model.uoe {
            unrank_set(rank, self.shape)?
        } else {
            unrank_multiset(rank, self.shape)?
        };
        Ok(BlockState::new(values))
    }

    /// The state's rank written as an `n * k`-bit string.
    pub fn encode(&self, state: &BlockState) -> Result<BitString, CodecError> {
        let rank = self.rank(state)?;
        Ok(BitString::from_value(rank as u64, self.shape.total_bits())?)
    }

    /// Decodes a block word; `None` when the word's value is above every
    /// rank (a redundancy pattern).
    pub fn decode(&self, word: &BitString) -> Result<Option<BlockState>, CodecError> {
        if word.len() != self.shape.total_bits() {
            return Err(BitError::LengthMismatch(word.len(), self.shape.total_bits()).into());
        }
        let rank = word.value() as u128;
        if rank >= self.total {
            return Ok(None);
        }
        Ok(Some(self.unrank(rank)?))
    }
}

/// The single-codeword compressed code: every collection state's codeword
/// is the binary expansion of its rank, zero-padded to `n * k` bits.
pub fn compressed_code(shape: BlockShape, model: MemoryModel) -> Result<Code, CodecError> {
    let codec = RankedCodec::new(shape, model)?;
    let states = enumerate_states(shape, model)?;
    let mut entries = Vec::with_capacity(states.len());
    for state in states {
        let word = codec.encode(&state)?;
        entries.push((state, vec![word]));
    }
    Ok(Code::from_entries(shape, model, StateSpace::Collection, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmodel::Scm;

    fn shape(n: u32, k: u32) -> BlockShape {
        BlockShape::new(n, k).unwrap()
    }

    #[test]
    fn set_rank_examples() {
        let sh = shape(2, 2);
        assert_eq!(rank_set(&[], sh).unwrap(), 0);
        // singletons follow the empty set in value order
        assert_eq!(rank_set(&[0], sh).unwrap(), 1);
        assert_eq!(rank_set(&[1], sh).unwrap(), 2);
        assert_eq!(rank_set(&[2], sh).unwrap(), 3);
        assert_eq!(rank_set(&[3], sh).unwrap(), 4);
        // the full range is [0, 1 + 4 + 6)
        let mut seen = std::collections::BTreeSet::new();
        for s in enumerate_states(sh, MemoryModel::set_model()).unwrap() {
            let r = rank_set(s.slots(), sh).unwrap();
            assert!(r < 11);
            assert!(seen.insert(r));
        }
        assert_eq!(seen.len(), 11);
    }

    #[test]
    fn set_rank_rejects_bad_input() {
        let sh = shape(2, 2);
        assert!(matches!(rank_set(&[1, 1], sh), Err(CodecError::DuplicateValue(1))));
        assert!(matches!(rank_set(&[4], sh), Err(CodecError::ValueOutOfRange { .. })));
        assert!(matches!(rank_set(&[0, 1, 2], sh), Err(CodecError::TooManyValues { .. })));
        assert!(matches!(unrank_set(11, sh), Err(CodecError::RankOutOfRange { .. })));
    }

    #[test]
    fn set_roundtrip_exhaustive_up_to_3x3() {
        for n in 1..=3 {
            for k in 1..=3 {
                let sh = shape(n, k);
                let total = set_total(sh).unwrap();
                assert_eq!(
                    total,
                    count_states(sh, MemoryModel::set_model()).unwrap(),
                    "range must match the model's state count"
                );
                for rank in 0..total {
                    let set = unrank_set(rank, sh).unwrap();
                    assert!(set.windows(2).all(|w| w[0] < w[1]));
                    assert_eq!(rank_set(&set, sh).unwrap(), rank, "n={n} k={k}");
                }
            }
        }
    }

    #[test]
    fn multiset_rank_examples() {
        // size-ascending: {}, {0}, {1}, {0,0}, {0,1}, {1,1}
        let sh = shape(1, 2);
        let ranks: Vec<u128> = [&[][..], &[0], &[1], &[0, 0], &[0, 1], &[1, 1]]
            .iter()
            .map(|v| rank_multiset(v, sh).unwrap())
            .collect();
        assert_eq!(ranks, vec![0, 1, 2, 3, 4, 5]);

        // the largest singleton ranks right after the 2^n - 1 smaller ones
        let sh = shape(2, 3);
        assert_eq!(rank_multiset(&[3], sh).unwrap(), 4);
    }

    #[test]
    fn multiset_roundtrip_exhaustive_up_to_2x3() {
        for n in 1..=2 {
            for k in 1..=3 {
                let sh = shape(n, k);
                let total = multiset_total(sh).unwrap();
                let loa = MemoryModel::new(true, false, Scm::None);
                assert_eq!(total, count_states(sh, loa).unwrap());
                for rank in 0..total {
                    let multi = unrank_multiset(rank, sh).unwrap();
                    assert!(multi.windows(2).all(|w| w[0] <= w[1]));
                    assert_eq!(rank_multiset(&multi, sh).unwrap(), rank, "n={n} k={k} r={rank}");
                }
                // stepping down from the top stays in the size-k class
                // until the boundary
                let size_k_block = multichoose(sh.alphabet(), k as u128).unwrap();
                for rank in (total - size_k_block)..total {
                    assert_eq!(unrank_multiset(rank, sh).unwrap().len(), k as usize);
                }
                assert!(unrank_multiset(total - size_k_block - 1, sh).unwrap().len() < k as usize);
            }
        }
    }

    #[test]
    fn ranked_codec_reports_redundancy() {
        // 4 set states over {0,1} with k = 3: 2 payload bits, 1 spare
        let codec = RankedCodec::new(shape(1, 3), MemoryModel::loads()).unwrap();
        assert_eq!(codec.total(), 4);
        assert_eq!(codec.payload_bits(), 2);
        assert_eq!(codec.redundancy_bits(), 1);

        // 11 set states at n=2, k=2: 4 payload bits, nothing spare
        let codec = RankedCodec::new(shape(2, 2), MemoryModel::set_model()).unwrap();
        assert_eq!(codec.total(), 11);
        assert_eq!(codec.payload_bits(), 4);
        assert_eq!(codec.redundancy_bits(), 0);

        // 6 multisets do not fit in 2 bits
        let loa = MemoryModel::new(true, false, Scm::None);
        assert!(matches!(RankedCodec::new(shape(1, 2), loa), Err(CodecError::NoRoom { .. })));
        // and an ordered model has no ranked codec at all
        assert!(matches!(
            RankedCodec::new(shape(1, 2), MemoryModel::gmm()),
            Err(CodecError::NeedsLoa(_))
        ));
    }

    #[test]
    fn compressed_code_is_valid_and_roundtrips() {
        for (n, k, model) in [
            (1, 3, MemoryModel::set_model()),
            (2, 2, MemoryModel::set_model()),
            (2, 3, MemoryModel::loads()),
            (2, 2, MemoryModel::new(true, false, Scm::WriteDelete)),
        ] {
            let sh = shape(n, k);
            let code = compressed_code(sh, model).unwrap();
            code.validate().unwrap();
            for state in enumerate_states(sh, model).unwrap() {
                let words = code.encode(&state).unwrap();
                assert_eq!(words.len(), 1);
                assert_eq!(code.decode(&words[0]), Some(&state));
            }
        }
    }

    #[test]
    fn codec_decode_flags_redundancy_patterns() {
        let codec = RankedCodec::new(shape(1, 3), MemoryModel::loads()).unwrap();
        for v in 0..4u64 {
            let word = BitString::from_value(v, 3).unwrap();
            assert!(codec.decode(&word).unwrap().is_some());
        }
        for v in 4..8u64 {
            let word = BitString::from_value(v, 3).unwrap();
            assert_eq!(codec.decode(&word).unwrap(), None);
        }
    }
}

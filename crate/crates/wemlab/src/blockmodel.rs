//! The eight block memory models: state representation, validity,
//! canonical forms, enumeration, closed-form counting, transition
//! enumeration/counting, and coding rates.
//!
//! A block is `k` slots of `n` bits; slot value 0 is NULL (empty). Three
//! properties generate the models:
//!
//! - **LOA** (local order agnosticism): slot order carries no information,
//!   so a state is a multiset and its canonical form is sorted.
//! - **UoE** (uniqueness of elements): no non-NULL value may appear twice
//!   in a block (NULL may repeat).
//! - **SCM** (single cell modification): a write changes one slot, either
//!   in the *overwrite* flavor (set any slot to any value, including NULL)
//!   or the *write/delete* flavor (clear a slot, or fill an empty one).
//!
//! Two state universes coexist and both are exposed:
//!
//! - The **counting** universe ([`count_states`], [`enumerate_states`])
//!   treats NULL as an ordinary alphabet symbol and counts collections of
//!   size 0..=k over all `2^n` symbols (ordered for models without LOA,
//!   except that the model with no properties keeps exactly-k tuples).
//!   This is the convention the closed-form state counts use, and the one
//!   the set/multiset codecs rank.
//! - The **block** universe ([`enumerate_block_states`],
//!   [`count_block_states`]) is the set of physically distinct k-slot
//!   blocks modulo canonicalization. Transitions, slot-packed codes, and
//!   the simulator live here: two collections that pad to the same k slots
//!   are the same block.
//!
//! The published closed forms contain several slips (an off-by-one product
//! index, an alphabet written as `n` where `2^n` is meant, transition
//! counts that ignore full or empty blocks). [`discrepancy_report`]
//! compares the literal published formulas against exhaustive enumeration
//! and against the corrected forms implemented here.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::comb::{binomial, falling_factorial, multichoose};

/// Enumeration guard: refuse to materialize more states than this.
pub const ENUMERATION_LIMIT: u128 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("block shape invalid: n={n}, k={k} (need n >= 1, k >= 1, n*k <= 64)")]
    BadShape { n: u32, k: u32 },
    #[error("state {state} has {got} slots, expected exactly {want}")]
    WrongSlotCount { state: String, got: usize, want: usize },
    #[error("slot value {value} does not fit in {n}-bit slots")]
    SlotTooWide { value: u64, n: u32 },
    #[error("state {0} violates the model's validity rules")]
    InvalidState(String),
    #[error("state {0} is not in canonical form under the model")]
    NotCanonical(String),
    #[error("{count} states exceed the enumeration guard of {limit}; use count_states instead")]
    TooManyStates { count: u128, limit: u128 },
    #[error("count overflows 128-bit arithmetic")]
    CountOverflow,
    #[error("collection transitions are only defined for local-order-agnostic models, got {0}")]
    CollectionNeedsLoa(String),
    #[error("collection state {state} has {got} elements, more than k={k}")]
    CollectionTooLarge { state: String, got: usize, k: u32 },
    #[error("cannot parse memory model from {0:?}")]
    BadModelSyntax(String),
    #[error("cannot parse block state from {0:?}")]
    BadStateSyntax(String),
}

/// Block geometry: `k` slots of `n` bits, with `n * k <= 64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BlockShape {
    n: u32,
    k: u32,
}

impl BlockShape {
    pub fn new(n: u32, k: u32) -> Result<Self, ModelError> {
        if n == 0 || k == 0 || n.saturating_mul(k) > 64 {
            return Err(ModelError::BadShape { n, k });
        }
        Ok(BlockShape { n, k })
    }

    /// Bits per slot.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Slots per block.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Codeword length in bits.
    pub fn total_bits(&self) -> usize {
        (self.n * self.k) as usize
    }

    /// Number of distinct slot values, `2^n`.
    pub fn alphabet(&self) -> u128 {
        1u128 << self.n
    }

    /// Largest slot value, `2^n - 1`.
    pub fn max_value(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }
}

impl fmt::Display for BlockShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n, self.k)
    }
}

impl<'de> Deserialize<'de> for BlockShape {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: u32,
            k: u32,
        }
        let raw = Raw::deserialize(deserializer)?;
        BlockShape::new(raw.n, raw.k).map_err(de::Error::custom)
    }
}

/// Single-cell-modification flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scm {
    /// No restriction: every valid state can transition to every other.
    None,
    /// One slot may be set to any different value, including NULL.
    Overwrite,
    /// One slot may be cleared, or one empty slot may be filled.
    WriteDelete,
}

/// One of the eight memory models: LOA and UoE flags plus the SCM flavor.
///
/// All eight flag combinations are constructible. The write/delete flavor
/// only exists as a kind of SCM, so "write/delete without SCM" cannot be
/// expressed, matching the model taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemoryModel {
    pub loa: bool,
    pub uoe: bool,
    pub scm: Scm,
}

impl MemoryModel {
    pub fn new(loa: bool, uoe: bool, scm: Scm) -> Self {
        MemoryModel { loa, uoe, scm }
    }

    /// The general memory model: no properties at all.
    pub fn gmm() -> Self {
        MemoryModel { loa: false, uoe: false, scm: Scm::None }
    }

    /// LOA + UoE without SCM: unordered unique elements.
    pub fn set_model() -> Self {
        MemoryModel { loa: true, uoe: true, scm: Scm::None }
    }

    /// LOA + UoE + SCM write/delete.
    pub fn loads() -> Self {
        MemoryModel { loa: true, uoe: true, scm: Scm::WriteDelete }
    }

    pub fn with_scm(self, scm: Scm) -> Self {
        MemoryModel { scm, ..self }
    }

    pub fn without_scm(self) -> Self {
        MemoryModel { scm: Scm::None, ..self }
    }
}

impl fmt::Display for MemoryModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<&str> = Vec::new();
        if self.loa {
            parts.push("loa");
        }
        if self.uoe {
            parts.push("uoe");
        }
        match self.scm {
            Scm::None => {}
            Scm::Overwrite => parts.push("scm:overwrite"),
            Scm::WriteDelete => parts.push("scm:write_delete"),
        }
        if parts.is_empty() {
            f.write_str("gmm")
        } else {
            f.write_str(&parts.join("+"))
        }
    }
}

impl FromStr for MemoryModel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::BadModelSyntax(s.to_string());
        let trimmed = s.trim();
        if trimmed == "gmm" {
            return Ok(MemoryModel::gmm());
        }
        if trimmed.is_empty() {
            return Err(bad());
        }
        let mut model = MemoryModel::gmm();
        for part in trimmed.split('+') {
            match part {
                "loa" if !model.loa => model.loa = true,
                "uoe" if !model.uoe => model.uoe = true,
                "scm:overwrite" if model.scm == Scm::None => model.scm = Scm::Overwrite,
                "scm:write_delete" if model.scm == Scm::None => model.scm = Scm::WriteDelete,
                _ => return Err(bad()),
            }
        }
        Ok(model)
    }
}

impl Serialize for MemoryModel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for MemoryModel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// A block state: a sequence of slot values.
///
/// In the block universe the sequence has exactly `k` entries (value 0 =
/// empty slot). In the counting universe it has 0..=k entries and 0 is an
/// ordinary symbol. Canonical form under LOA is non-decreasing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockState {
    slots: Vec<u64>,
}

impl BlockState {
    pub fn new(slots: Vec<u64>) -> Self {
        BlockState { slots }
    }

    pub fn empty_block(shape: BlockShape) -> Self {
        BlockState { slots: vec![0; shape.k() as usize] }
    }

    pub fn slots(&self) -> &[u64] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Number of occupied (non-NULL) slots: `s` in the closed forms.
    pub fn occupied(&self) -> usize {
        self.slots.iter().filter(|&&v| v != 0).count()
    }

    /// Number of distinct non-NULL values: `v` in the closed forms.
    pub fn distinct_values(&self) -> usize {
        let set: BTreeSet<u64> = self.slots.iter().copied().filter(|&v| v != 0).collect();
        set.len()
    }
}

impl fmt::Display for BlockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, v) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("]")
    }
}

impl FromStr for BlockState {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::BadStateSyntax(s.to_string());
        let inner = s.trim().strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(bad)?;
        let inner = inner.trim();
        if inner.is_empty() {
            return Ok(BlockState::new(Vec::new()));
        }
        let mut slots = Vec::new();
        for part in inner.split(',') {
            slots.push(part.trim().parse::<u64>().map_err(|_| bad())?);
        }
        Ok(BlockState::new(slots))
    }
}

impl Serialize for BlockState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BlockState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// A canonical source state and every state one valid write away from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSet {
    pub source: BlockState,
    pub successors: BTreeSet<BlockState>,
}

fn check_block(state: &BlockState, shape: BlockShape) -> Result<(), ModelError> {
    if state.len() != shape.k() as usize {
        return Err(ModelError::WrongSlotCount {
            state: state.to_string(),
            got: state.len(),
            want: shape.k() as usize,
        });
    }
    for &v in state.slots() {
        if v > shape.max_value() {
            return Err(ModelError::SlotTooWide { value: v, n: shape.n() });
        }
    }
    Ok(())
}

fn uoe_ok(slots: &[u64]) -> bool {
    let mut seen = BTreeSet::new();
    slots.iter().filter(|&&v| v != 0).all(|&v| seen.insert(v))
}

/// Whether a k-slot block state is valid under the model. LOA and SCM
/// never invalidate a state; only the UoE duplicate rule can (NULL may
/// repeat). Slot-count or slot-width violations are caller bugs and error.
pub fn is_valid(
    state: &BlockState,
    shape: BlockShape,
    model: MemoryModel,
) -> Result<bool, ModelError> {
    check_block(state, shape)?;
    if model.uoe && !uoe_ok(state.slots()) {
        return Ok(false);
    }
    Ok(true)
}

/// The canonical representative of a state: sorted when the model is
/// order-agnostic, unchanged otherwise. Idempotent; preserves the slot
/// multiset.
pub fn canonicalize(state: &BlockState, model: MemoryModel) -> BlockState {
    if model.loa {
        let mut slots = state.slots.clone();
        slots.sort_unstable();
        BlockState::new(slots)
    } else {
        state.clone()
    }
}

pub fn is_canonical(state: &BlockState, model: MemoryModel) -> bool {
    !model.loa || state.slots.windows(2).all(|w| w[0] <= w[1])
}

// ---------------------------------------------------------------------------
// Counting universe
// ---------------------------------------------------------------------------

/// Closed-form number of states in the counting universe:
///
/// - no properties: `2^(n*k)` exactly-k tuples;
/// - UoE: ordered collections of distinct symbols, sizes 0..=k;
/// - LOA: multisets of sizes 0..=k;
/// - LOA+UoE: sets of sizes 0..=k;
///
/// all over the full `2^n`-symbol alphabet with NULL as symbol 0. SCM never
/// changes the count. Equals `enumerate_states(...).len()` whenever that
/// enumeration is allowed.
pub fn count_states(shape: BlockShape, model: MemoryModel) -> Result<u128, ModelError> {
    let a = shape.alphabet();
    let k = shape.k() as u128;
    let total = match (model.loa, model.uoe) {
        (false, false) => Some(1u128 << shape.total_bits()),
        (false, true) => sum_over_sizes(k, |i| falling_factorial(a, i)),
        (true, false) => sum_over_sizes(k, |i| multichoose(a, i)),
        (true, true) => sum_over_sizes(k, |i| binomial(a, i)),
    };
    total.ok_or(ModelError::CountOverflow)
}

fn sum_over_sizes(k: u128, term: impl Fn(u128) -> Option<u128>) -> Option<u128> {
    let mut total: u128 = 0;
    for i in 0..=k {
        total = total.checked_add(term(i)?)?;
    }
    Some(total)
}

/// Every canonical state of the counting universe, size-ascending then
/// lexicographic. Errors when the count exceeds [`ENUMERATION_LIMIT`].
pub fn enumerate_states(
    shape: BlockShape,
    model: MemoryModel,
) -> Result<Vec<BlockState>, ModelError> {
    let count = count_states(shape, model)?;
    if count > ENUMERATION_LIMIT {
        return Err(ModelError::TooManyStates { count, limit: ENUMERATION_LIMIT });
    }
    let a = shape.alphabet() as u64; // the guard implies this fits
    let k = shape.k() as usize;
    let mut out = Vec::with_capacity(count as usize);
    match (model.loa, model.uoe) {
        (false, false) => enumerate_tuples(a, k, &mut out),
        (false, true) => {
            for size in 0..=k {
                distinct_sequences(a, size, &mut Vec::new(), &mut out);
            }
        }
        (true, false) => {
            for size in 0..=k {
                nondecreasing_sequences(a, size, 0, &mut Vec::new(), &mut out);
            }
        }
        (true, true) => {
            for size in 0..=k {
                increasing_sequences(a, size, 0, &mut Vec::new(), &mut out);
            }
        }
    }
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}

fn enumerate_tuples(a: u64, k: usize, out: &mut Vec<BlockState>) {
    let mut slots = vec![0u64; k];
    loop {
        out.push(BlockState::new(slots.clone()));
        // odometer, leftmost slot most significant
        let mut pos = k;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if slots[pos] + 1 < a {
                slots[pos] += 1;
                for s in slots.iter_mut().skip(pos + 1) {
                    *s = 0;
                }
                break;
            }
            slots[pos] = 0;
        }
    }
}

fn distinct_sequences(a: u64, remaining: usize, prefix: &mut Vec<u64>, out: &mut Vec<BlockState>) {
    if remaining == 0 {
        out.push(BlockState::new(prefix.clone()));
        return;
    }
    for v in 0..a {
        if prefix.contains(&v) {
            continue;
        }
        prefix.push(v);
        distinct_sequences(a, remaining - 1, prefix, out);
        prefix.pop();
    }
}

fn nondecreasing_sequences(
    a: u64,
    remaining: usize,
    min: u64,
    prefix: &mut Vec<u64>,
    out: &mut Vec<BlockState>,
) {
    if remaining == 0 {
        out.push(BlockState::new(prefix.clone()));
        return;
    }
    for v in min..a {
        prefix.push(v);
        nondecreasing_sequences(a, remaining - 1, v, prefix, out);
        prefix.pop();
    }
}

fn increasing_sequences(
    a: u64,
    remaining: usize,
    min: u64,
    prefix: &mut Vec<u64>,
    out: &mut Vec<BlockState>,
) {
    if remaining == 0 {
        out.push(BlockState::new(prefix.clone()));
        return;
    }
    for v in min..a {
        prefix.push(v);
        increasing_sequences(a, remaining - 1, v + 1, prefix, out);
        prefix.pop();
    }
}

// ---------------------------------------------------------------------------
// Block universe
// ---------------------------------------------------------------------------

/// Number of physically distinct k-slot blocks modulo canonicalization:
/// `2^(n*k)` tuples, UoE-filtered and/or sorted under LOA.
pub fn count_block_states(shape: BlockShape, model: MemoryModel) -> Result<u128, ModelError> {
    let a = shape.alphabet();
    let k = shape.k() as u128;
    let nonnull = a - 1;
    let total = match (model.loa, model.uoe) {
        (false, false) => Some(1u128 << shape.total_bits()),
        // choose the occupied slots, then an ordered assignment of distinct
        // non-NULL values to them
        (false, true) => sum_over_sizes(k, |s| {
            binomial(k, s)?.checked_mul(falling_factorial(nonnull, s)?)
        }),
        // multisets of exactly k over the full alphabet (NULL padding)
        (true, false) => multichoose(a, k),
        // sets of up to k non-NULL values
        (true, true) => sum_over_sizes(k, |s| binomial(nonnull, s)),
    };
    total.ok_or(ModelError::CountOverflow)
}

/// Every canonical block state, lexicographic. Errors when the count
/// exceeds [`ENUMERATION_LIMIT`].
pub fn enumerate_block_states(
    shape: BlockShape,
    model: MemoryModel,
) -> Result<Vec<BlockState>, ModelError> {
    let count = count_block_states(shape, model)?;
    if count > ENUMERATION_LIMIT {
        return Err(ModelError::TooManyStates { count, limit: ENUMERATION_LIMIT });
    }
    let a = shape.alphabet() as u64;
    let k = shape.k() as usize;
    let mut out = Vec::with_capacity(count as usize);
    match (model.loa, model.uoe) {
        (false, false) => enumerate_tuples(a, k, &mut out),
        (false, true) => {
            enumerate_tuples(a, k, &mut out);
            out.retain(|s| uoe_ok(s.slots()));
        }
        (true, false) => nondecreasing_sequences(a, k, 0, &mut Vec::new(), &mut out),
        (true, true) => {
            nondecreasing_sequences(a, k, 0, &mut Vec::new(), &mut out);
            out.retain(|s| uoe_ok(s.slots()));
        }
    }
    debug_assert_eq!(out.len() as u128, count);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Transitions (block universe)
// ---------------------------------------------------------------------------

fn check_canonical_valid(
    state: &BlockState,
    shape: BlockShape,
    model: MemoryModel,
) -> Result<(), ModelError> {
    if !is_valid(state, shape, model)? {
        return Err(ModelError::InvalidState(state.to_string()));
    }
    if !is_canonical(state, model) {
        return Err(ModelError::NotCanonical(state.to_string()));
    }
    Ok(())
}

/// All states one valid write away from a canonical block state.
///
/// - `scm: none`: every valid canonical block state except the source;
/// - `scm: overwrite`: one slot set to any different value (including
///   NULL), filtered for validity and canonicalized;
/// - `scm: write_delete`: one occupied slot cleared, or one empty slot
///   filled with a non-NULL value.
///
/// Under LOA a single-slot change never canonicalizes back onto the
/// source, because the slot multiset always changes.
pub fn enumerate_transitions(
    state: &BlockState,
    shape: BlockShape,
    model: MemoryModel,
) -> Result<TransitionSet, ModelError> {
    check_canonical_valid(state, shape, model)?;
    let mut successors = BTreeSet::new();
    match model.scm {
        Scm::None => {
            for other in enumerate_block_states(shape, model)? {
                if other != *state {
                    successors.insert(other);
                }
            }
        }
        Scm::Overwrite => {
            for slot in 0..state.len() {
                for value in 0..=shape.max_value() {
                    if value == state.slots[slot] {
                        continue;
                    }
                    let mut slots = state.slots.clone();
                    slots[slot] = value;
                    push_if_valid(slots, shape, model, state, &mut successors);
                }
            }
        }
        Scm::WriteDelete => {
            for slot in 0..state.len() {
                if state.slots[slot] != 0 {
                    let mut slots = state.slots.clone();
                    slots[slot] = 0;
                    push_if_valid(slots, shape, model, state, &mut successors);
                } else {
                    for value in 1..=shape.max_value() {
                        let mut slots = state.slots.clone();
                        slots[slot] = value;
                        push_if_valid(slots, shape, model, state, &mut successors);
                    }
                }
            }
        }
    }
    Ok(TransitionSet { source: state.clone(), successors })
}

fn push_if_valid(
    slots: Vec<u64>,
    shape: BlockShape,
    model: MemoryModel,
    source: &BlockState,
    successors: &mut BTreeSet<BlockState>,
) {
    let candidate = BlockState::new(slots);
    if model.uoe && !uoe_ok(candidate.slots()) {
        return;
    }
    let canonical = canonicalize(&candidate, model);
    debug_assert!(is_valid(&canonical, shape, model) == Ok(true));
    if canonical != *source {
        successors.insert(canonical);
    }
}

/// Closed-form transition count for a canonical block state, as a function
/// of `s` (occupied slots) and `v` (distinct non-NULL values).
///
/// These are the enumeration-faithful forms; they agree with
/// [`enumerate_transitions`] on every valid state. Where the published
/// table differs (see [`published_transition_count`]) the difference is
/// surfaced by [`discrepancy_report`], not silently adopted.
pub fn count_transitions(
    state: &BlockState,
    shape: BlockShape,
    model: MemoryModel,
) -> Result<u128, ModelError> {
    check_canonical_valid(state, shape, model)?;
    let a = shape.alphabet();
    let k = shape.k() as u128;
    let s = state.occupied() as u128;
    let v = state.distinct_values() as u128;
    let room = if s < k { 1u128 } else { 0 };
    let count = match model.scm {
        Scm::None => count_block_states(shape, model)? - 1,
        Scm::Overwrite => match (model.loa, model.uoe) {
            (false, false) => k * (a - 1),
            (false, true) => s * (a - s) + (k - s) * (a - 1 - s),
            (true, false) => (v + room) * (a - 1),
            (true, true) => s * (a - s) + room * (a - 1 - s),
        },
        Scm::WriteDelete => match (model.loa, model.uoe) {
            (false, false) => s + (k - s) * (a - 1),
            (false, true) => s + (k - s) * (a - 1 - s),
            (true, false) => v + room * (a - 1),
            (true, true) => s + room * (a - 1 - s),
        },
    };
    Ok(count)
}

/// Coding rate of the model at this shape: `log2(count_states) / (n*k)`.
/// Exactly 1.0 for the no-property model.
pub fn rate(shape: BlockShape, model: MemoryModel) -> Result<f64, ModelError> {
    let count = count_states(shape, model)?;
    Ok((count as f64).log2() / shape.total_bits() as f64)
}

// ---------------------------------------------------------------------------
// Published-formula audit
// ---------------------------------------------------------------------------

/// The *literal* published closed form for the number of valid states,
/// slips included: the UoE product runs one index too far and the LOA/Set
/// rows use an alphabet of `n` instead of `2^n`. `None` on overflow.
pub fn published_state_count(shape: BlockShape, model: MemoryModel) -> Option<u128> {
    let a = shape.alphabet();
    let n = shape.n() as u128;
    let k = shape.k() as u128;
    match (model.loa, model.uoe) {
        (false, false) => Some(1u128 << shape.total_bits()),
        // printed as a sum over i of prod_{j=0}^{i} (2^n - j): i+1 factors
        (false, true) => sum_over_sizes(k, |i| falling_factorial(a, i + 1)),
        // printed with alphabet n: (n+i-1)! / (i! (n-1)!)
        (true, false) => sum_over_sizes(k, |i| multichoose(n, i)),
        // printed with alphabet n: n! / (i! (n-i)!)
        (true, true) => sum_over_sizes(k, |i| binomial(n, i)),
    }
}

/// The literal published transition count for a state with `s` occupied
/// slots and `v` distinct non-NULL values. `None` where no formula is
/// printed (write/delete is "not defined" without SCM, and no table covers
/// unrestricted transitions of models with properties).
pub fn published_transition_count(
    state: &BlockState,
    shape: BlockShape,
    model: MemoryModel,
) -> Option<u128> {
    let a = shape.alphabet();
    let k = shape.k() as u128;
    let s = state.occupied() as u128;
    let v = state.distinct_values() as u128;
    match model.scm {
        Scm::None => match (model.loa, model.uoe) {
            // the table's "GMM" row: all bit-strings, self included
            (false, false) => Some(1u128 << shape.total_bits()),
            _ => None,
        },
        Scm::Overwrite => Some(match (model.loa, model.uoe) {
            (false, false) => k * (a - 1),
            (false, true) => k * (a - s),
            (true, _) => (v + 1) * (a - 1),
        }),
        Scm::WriteDelete => Some(match (model.loa, model.uoe) {
            (false, false) => s + (k - s) * (a - 1),
            (false, true) => a - 1,
            (true, false) => v + (a - 1),
            (true, true) => a,
        }),
    }
}

/// One audited state-count row of the formula-vs-enumeration report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateCountRow {
    pub model: MemoryModel,
    pub n: u32,
    pub k: u32,
    pub enumerated: u64,
    pub implemented: u64,
    pub published: Option<u64>,
    pub implemented_matches: bool,
    pub published_matches: bool,
}

/// One audited transition row: per-state comparisons aggregated per shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionCountRow {
    pub model: MemoryModel,
    pub n: u32,
    pub k: u32,
    pub states_checked: u64,
    pub implemented_mismatches: u64,
    pub published_mismatches: u64,
    pub published_formula_defined: bool,
    /// First state where the published formula disagrees with enumeration.
    pub example: Option<TransitionMismatch>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionMismatch {
    pub state: BlockState,
    pub enumerated: u64,
    pub published: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub max_n: u32,
    pub max_k: u32,
    pub state_rows: Vec<StateCountRow>,
    pub transition_rows: Vec<TransitionCountRow>,
}

impl DiscrepancyReport {
    /// Rows where the literal published formula disagrees with enumeration.
    pub fn flagged_state_rows(&self) -> impl Iterator<Item = &StateCountRow> {
        self.state_rows.iter().filter(|r| !r.published_matches)
    }

    pub fn flagged_transition_rows(&self) -> impl Iterator<Item = &TransitionCountRow> {
        self.transition_rows.iter().filter(|r| r.published_formula_defined && r.published_mismatches > 0)
    }
}

/// Audits every model at every shape up to `max_n` x `max_k`: exhaustive
/// enumeration is the ground truth, compared against both the implemented
/// closed forms and the literal published ones.
pub fn discrepancy_report(max_n: u32, max_k: u32) -> Result<DiscrepancyReport, ModelError> {
    let mut state_rows = Vec::new();
    let mut transition_rows = Vec::new();
    for n in 1..=max_n {
        for k in 1..=max_k {
            let shape = BlockShape::new(n, k)?;
            for (loa, uoe) in [(false, false), (false, true), (true, false), (true, true)] {
                let base = MemoryModel::new(loa, uoe, Scm::None);
                let enumerated = enumerate_states(shape, base)?.len() as u64;
                let implemented = count_states(shape, base)? as u64;
                let published = published_state_count(shape, base).map(|c| c as u64);
                state_rows.push(StateCountRow {
                    model: base,
                    n,
                    k,
                    enumerated,
                    implemented,
                    published,
                    implemented_matches: implemented == enumerated,
                    published_matches: published == Some(enumerated),
                });

                for scm in [Scm::None, Scm::Overwrite, Scm::WriteDelete] {
                    let model = base.with_scm(scm);
                    let states = enumerate_block_states(shape, model)?;
                    let mut implemented_mismatches = 0;
                    let mut published_mismatches = 0;
                    let mut example = None;
                    let published_defined = published_transition_count(&states[0], shape, model).is_some();
                    for state in &states {
                        let enumerated =
                            enumerate_transitions(state, shape, model)?.successors.len() as u64;
                        let implemented = count_transitions(state, shape, model)? as u64;
                        if implemented != enumerated {
                            implemented_mismatches += 1;
                        }
                        if let Some(published) = published_transition_count(state, shape, model) {
                            if published as u64 != enumerated {
                                published_mismatches += 1;
                                if example.is_none() {
                                    example = Some(TransitionMismatch {
                                        state: state.clone(),
                                        enumerated,
                                        published: published as u64,
                                    });
                                }
                            }
                        }
                    }
                    transition_rows.push(TransitionCountRow {
                        model,
                        n,
                        k,
                        states_checked: states.len() as u64,
                        implemented_mismatches,
                        published_mismatches,
                        published_formula_defined: published_defined,
                        example,
                    });
                }
            }
        }
    }
    Ok(DiscrepancyReport { max_n, max_k, state_rows, transition_rows })
}

// ---------------------------------------------------------------------------
// Collection transitions (counting universe, LOA family)
// ---------------------------------------------------------------------------

/// Successors of a counting-universe collection state under an
/// order-agnostic model, with NULL treated as an ordinary symbol:
///
/// - `scm: none`: every other collection state;
/// - `scm: write_delete`: add one symbol (when below k) or remove one;
/// - `scm: overwrite`: additionally replace one symbol by a different one.
///
/// This is the transition structure used by codes whose domain is the
/// counting universe (compressed codes and redundancy search).
pub fn collection_successors(
    state: &BlockState,
    shape: BlockShape,
    model: MemoryModel,
) -> Result<Vec<BlockState>, ModelError> {
    if !model.loa {
        return Err(ModelError::CollectionNeedsLoa(model.to_string()));
    }
    let k = shape.k() as usize;
    if state.len() > k {
        return Err(ModelError::CollectionTooLarge {
            state: state.to_string(),
            got: state.len(),
            k: shape.k(),
        });
    }
    for &v in state.slots() {
        if v > shape.max_value() {
            return Err(ModelError::SlotTooWide { value: v, n: shape.n() });
        }
    }
    if !is_canonical(state, model) {
        return Err(ModelError::NotCanonical(state.to_string()));
    }
    if model.uoe && !state.slots().windows(2).all(|w| w[0] < w[1]) {
        return Err(ModelError::InvalidState(state.to_string()));
    }

    let mut successors = BTreeSet::new();
    if model.scm == Scm::None {
        for other in enumerate_states(shape, model)? {
            if other != *state {
                successors.insert(other);
            }
        }
        return Ok(successors.into_iter().collect());
    }

    let elements: Vec<u64> = {
        let mut distinct = state.slots().to_vec();
        distinct.dedup();
        distinct
    };

    // remove one element
    for &x in &elements {
        let mut rest = state.slots().to_vec();
        let pos = rest.iter().position(|&e| e == x).unwrap();
        rest.remove(pos);
        successors.insert(BlockState::new(rest));
    }
    // add one element
    if state.len() < k {
        for y in 0..=shape.max_value() {
            if model.uoe && state.slots().contains(&y) {
                continue;
            }
            let mut grown = state.slots().to_vec();
            grown.push(y);
            grown.sort_unstable();
            successors.insert(BlockState::new(grown));
        }
    }
    // replace one element (overwrite flavor only)
    if model.scm == Scm::Overwrite {
        for &x in &elements {
            for y in 0..=shape.max_value() {
                if y == x || (model.uoe && state.slots().contains(&y)) {
                    continue;
                }
                let mut swapped = state.slots().to_vec();
                let pos = swapped.iter().position(|&e| e == x).unwrap();
                swapped[pos] = y;
                swapped.sort_unstable();
                successors.insert(BlockState::new(swapped));
            }
        }
    }
    successors.remove(state);
    Ok(successors.into_iter().collect())
}

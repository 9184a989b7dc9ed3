//! Codes from block states to codeword sets, with bit-flip cost metrics.
//!
//! A [`Code`] assigns every state of its domain a non-empty, pairwise
//! disjoint set of codewords of length `n * k` and decodes any assigned
//! word back to its state. The write cost of a transition is the Hamming
//! distance from the current codeword to the *nearest* codeword of the
//! target state; [`CostReport`] aggregates the maximum and exact-rational
//! average of that cost over all (state, codeword, successor) triples,
//! plus the all-pairs total for single-codeword codes.
//!
//! All three metrics are invariant under xoring every codeword with a
//! fixed mask and under permuting bit positions; the search engines lean
//! on both invariances.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitspace::{hamming_distance, BitError, BitString};
use crate::blockmodel::{
    collection_successors, enumerate_block_states, enumerate_states, enumerate_transitions,
    BlockShape, BlockState, MemoryModel, ModelError,
};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bits(#[from] BitError),
    #[error("indicator code needs 2^n - 1 <= n*k, but {values} values exceed {bits} bits")]
    IndicatorCapacity { values: u64, bits: usize },
    #[error("total cost is defined for single-codeword codes; state {0} has more than one word")]
    MultiCodeword(BlockState),
    #[error("successor state {0} is not in the code's domain")]
    UnknownSuccessor(BlockState),
    #[error("invalid code document: {0}")]
    Document(String),
}

/// Which state universe a code's domain lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateSpace {
    /// Physically distinct k-slot blocks; transitions are slot writes.
    Block,
    /// Size-tracked symbol collections (the counting universe); transitions
    /// are element moves. Requires an order-agnostic model.
    Collection,
}

impl StateSpace {
    pub fn enumerate(
        self,
        shape: BlockShape,
        model: MemoryModel,
    ) -> Result<Vec<BlockState>, ModelError> {
        match self {
            StateSpace::Block => enumerate_block_states(shape, model),
            StateSpace::Collection => enumerate_states(shape, model),
        }
    }

    pub fn successors(
        self,
        state: &BlockState,
        shape: BlockShape,
        model: MemoryModel,
    ) -> Result<Vec<BlockState>, ModelError> {
        match self {
            StateSpace::Block => Ok(enumerate_transitions(state, shape, model)?
                .successors
                .into_iter()
                .collect()),
            StateSpace::Collection => collection_successors(state, shape, model),
        }
    }
}

/// An exact non-negative rational, kept reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den != 0, "zero denominator");
        let g = gcd(num, den);
        Rational { num: num / g.max(1), den: den / g.max(1) }
    }

    pub fn zero() -> Self {
        Rational { num: 0, den: 1 }
    }

    pub fn from_integer(v: u64) -> Self {
        Rational { num: v, den: 1 }
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num as u128 * other.den as u128).cmp(&(other.num as u128 * self.den as u128))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Rational", 2)?;
        s.serialize_field("num", &self.num)?;
        s.serialize_field("den", &self.den)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            num: u64,
            den: u64,
        }
        let raw = Raw::deserialize(deserializer)?;
        if raw.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(raw.num, raw.den))
    }
}

/// Aggregated bit-flip costs of a code.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    /// Worst write cost over all valid transitions.
    pub max_cost: u32,
    /// Mean write cost, uniform over (state, codeword, successor) triples.
    pub avg_cost: Rational,
    /// All-ordered-pairs codeword distance sum; single-codeword codes only.
    pub total_cost: Option<u64>,
    /// `total_cost / codeword_count`, for comparison against per-codeword
    /// benchmarks.
    pub total_cost_per_codeword: Option<Rational>,
    pub codeword_count: u64,
    pub transition_samples: u64,
}

impl CostReport {
    /// One CSV row; see [`CostReport::csv_header`] for the schema.
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.max_cost.to_string(),
            self.avg_cost.num().to_string(),
            self.avg_cost.den().to_string(),
            format!("{:?}", self.avg_cost.to_f64()),
            self.total_cost.map(|t| t.to_string()).unwrap_or_default(),
            self.total_cost_per_codeword.map(|t| t.to_string()).unwrap_or_default(),
            self.codeword_count.to_string(),
            self.transition_samples.to_string(),
        ]
    }

    pub fn csv_header() -> Vec<&'static str> {
        vec![
            "max_cost",
            "avg_cost_num",
            "avg_cost_den",
            "avg_cost",
            "total_cost",
            "total_cost_per_codeword",
            "codeword_count",
            "transition_samples",
        ]
    }
}

/// The valid-transition structure of a state domain, precomputed once so
/// that repeated cost evaluations (code search) stay cheap.
pub struct TransitionTable {
    shape: BlockShape,
    model: MemoryModel,
    space: StateSpace,
    states: Vec<BlockState>,
    index: BTreeMap<BlockState, usize>,
    successors: Vec<Vec<usize>>,
}

impl TransitionTable {
    pub fn build(
        shape: BlockShape,
        model: MemoryModel,
        space: StateSpace,
    ) -> Result<Self, CodeError> {
        let states = space.enumerate(shape, model)?;
        let index: BTreeMap<BlockState, usize> =
            states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut successors = Vec::with_capacity(states.len());
        for state in &states {
            let mut ids = Vec::new();
            for succ in space.successors(state, shape, model)? {
                let id = index
                    .get(&succ)
                    .copied()
                    .ok_or_else(|| CodeError::UnknownSuccessor(succ.clone()))?;
                ids.push(id);
            }
            successors.push(ids);
        }
        Ok(TransitionTable { shape, model, space, states, index, successors })
    }

    pub fn states(&self) -> &[BlockState] {
        &self.states
    }

    pub fn state_index(&self, state: &BlockState) -> Option<usize> {
        self.index.get(state).copied()
    }

    pub fn successor_ids(&self, state_id: usize) -> &[usize] {
        &self.successors[state_id]
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn model(&self) -> MemoryModel {
        self.model
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    /// Costs of an assignment of one-or-more codewords per state, indexed
    /// like `self.states()`.
    pub fn evaluate(&self, words: &[Vec<BitString>]) -> Result<CostReport, CodeError> {
        assert_eq!(words.len(), self.states.len(), "assignment does not match the domain");
        let mut max_cost = 0u32;
        let mut sum = 0u64;
        let mut samples = 0u64;
        for (state_id, sources) in words.iter().enumerate() {
            for from in sources {
                for &succ in &self.successors[state_id] {
                    let best = words[succ]
                        .iter()
                        .map(|to| hamming_distance(from, to))
                        .collect::<Result<Vec<_>, _>>()?
                        .into_iter()
                        .min()
                        .expect("codeword sets are non-empty");
                    max_cost = max_cost.max(best);
                    sum += best as u64;
                    samples += 1;
                }
            }
        }
        let codeword_count: u64 = words.iter().map(|w| w.len() as u64).sum();
        let single = words.iter().all(|w| w.len() == 1);
        let total_cost = if single {
            let mut total = 0u64;
            for a in words.iter() {
                for b in words.iter() {
                    total += hamming_distance(&a[0], &b[0])? as u64;
                }
            }
            Some(total)
        } else {
            None
        };
        Ok(CostReport {
            max_cost,
            avg_cost: if samples == 0 { Rational::zero() } else { Rational::new(sum, samples) },
            total_cost,
            total_cost_per_codeword: total_cost.map(|t| Rational::new(t, codeword_count)),
            codeword_count,
            transition_samples: samples,
        })
    }
}

/// A first defect found while validating a code, with a witness.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodeDefect {
    #[error("state {0} appears twice in the code")]
    DuplicateState(BlockState),
    #[error("state {0} has no codewords")]
    EmptyCodewordSet(BlockState),
    #[error("codeword {word} of state {state} has length {got}, expected {want}")]
    WrongLength { state: BlockState, word: BitString, got: usize, want: usize },
    #[error("codeword {word} is shared by states {first} and {second}")]
    SharedCodeword { word: BitString, first: BlockState, second: BlockState },
    #[error("valid state {0} has no encoding")]
    MissingState(BlockState),
    #[error("state {0} is not a valid canonical state of the model")]
    ForeignState(BlockState),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CodeEntry {
    state: BlockState,
    codewords: Vec<BitString>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CodeDoc {
    shape: BlockShape,
    model: MemoryModel,
    space: StateSpace,
    entries: Vec<CodeEntry>,
}

/// A mapping from every canonical state of a model to a non-empty set of
/// disjoint codewords, with decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Code {
    shape: BlockShape,
    model: MemoryModel,
    space: StateSpace,
    states: Vec<BlockState>,
    codewords: Vec<Vec<BitString>>,
    decode: BTreeMap<BitString, usize>,
}

impl Code {
    /// Builds a code from explicit entries. Structural problems are kept,
    /// not rejected; [`Code::validate`] reports the first one with a
    /// witness. Decoding prefers the first state that claims a word.
    pub fn from_entries(
        shape: BlockShape,
        model: MemoryModel,
        space: StateSpace,
        entries: Vec<(BlockState, Vec<BitString>)>,
    ) -> Self {
        let mut states = Vec::with_capacity(entries.len());
        let mut codewords = Vec::with_capacity(entries.len());
        let mut decode = BTreeMap::new();
        for (i, (state, mut words)) in entries.into_iter().enumerate() {
            words.sort_unstable();
            words.dedup();
            for w in &words {
                decode.entry(*w).or_insert(i);
            }
            states.push(state);
            codewords.push(words);
        }
        Code { shape, model, space, states, codewords, decode }
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn model(&self) -> MemoryModel {
        self.model
    }

    pub fn space(&self) -> StateSpace {
        self.space
    }

    pub fn states(&self) -> &[BlockState] {
        &self.states
    }

    /// The codeword set of a state, if the state is in the domain.
    pub fn encode(&self, state: &BlockState) -> Option<&[BitString]> {
        let i = self.states.iter().position(|s| s == state)?;
        Some(&self.codewords[i])
    }

    pub fn codeword_sets(&self) -> &[Vec<BitString>] {
        &self.codewords
    }

    pub fn decode(&self, word: &BitString) -> Option<&BlockState> {
        self.decode.get(word).map(|&i| &self.states[i])
    }

    pub fn codeword_count(&self) -> u64 {
        self.codewords.iter().map(|w| w.len() as u64).sum()
    }

    pub fn is_single_codeword(&self) -> bool {
        self.codewords.iter().all(|w| w.len() == 1)
    }

    /// Checks every code invariant: no duplicate or foreign states, a
    /// non-empty codeword set of the right lengths per state, disjoint
    /// codeword sets, and coverage of every valid state of the model.
    pub fn validate(&self) -> Result<(), CodeDefect> {
        let want_len = self.shape.total_bits();
        let mut seen_states = BTreeMap::new();
        let mut seen_words: BTreeMap<BitString, usize> = BTreeMap::new();
        for (i, state) in self.states.iter().enumerate() {
            if seen_states.insert(state.clone(), i).is_some() {
                return Err(CodeDefect::DuplicateState(state.clone()));
            }
            if self.codewords[i].is_empty() {
                return Err(CodeDefect::EmptyCodewordSet(state.clone()));
            }
            for word in &self.codewords[i] {
                if word.len() != want_len {
                    return Err(CodeDefect::WrongLength {
                        state: state.clone(),
                        word: *word,
                        got: word.len(),
                        want: want_len,
                    });
                }
                if let Some(&other) = seen_words.get(word) {
                    return Err(CodeDefect::SharedCodeword {
                        word: *word,
                        first: self.states[other].clone(),
                        second: state.clone(),
                    });
                }
                seen_words.insert(*word, i);
            }
        }
        let domain = self
            .space
            .enumerate(self.shape, self.model)
            .map_err(|_| CodeDefect::ForeignState(self.states[0].clone()))?;
        for state in &domain {
            if !seen_states.contains_key(state) {
                return Err(CodeDefect::MissingState(state.clone()));
            }
        }
        for state in self.states.iter() {
            if !domain.contains(state) {
                return Err(CodeDefect::ForeignState(state.clone()));
            }
        }
        Ok(())
    }

    pub fn is_valid_code(&self) -> bool {
        self.validate().is_ok()
    }

    /// The transition structure of this code's domain.
    pub fn transition_table(&self) -> Result<TransitionTable, CodeError> {
        TransitionTable::build(self.shape, self.model, self.space)
    }

    /// Max/avg/total cost metrics; see [`CostReport`].
    pub fn cost_report(&self) -> Result<CostReport, CodeError> {
        let table = self.transition_table()?;
        let mut words: Vec<Vec<BitString>> = vec![Vec::new(); table.states().len()];
        for (state, set) in self.states.iter().zip(&self.codewords) {
            let id = table
                .state_index(state)
                .ok_or_else(|| CodeError::UnknownSuccessor(state.clone()))?;
            words[id] = set.clone();
        }
        table.evaluate(&words)
    }

    pub fn max_transition_cost(&self) -> Result<u32, CodeError> {
        Ok(self.cost_report()?.max_cost)
    }

    pub fn avg_transition_cost(&self) -> Result<Rational, CodeError> {
        Ok(self.cost_report()?.avg_cost)
    }

    /// Sum of Hamming distances over all ordered codeword pairs. Errors on
    /// multi-codeword codes, where the metric is not defined.
    pub fn total_cost(&self) -> Result<u64, CodeError> {
        if let Some((i, _)) = self.codewords.iter().enumerate().find(|(_, w)| w.len() != 1) {
            return Err(CodeError::MultiCodeword(self.states[i].clone()));
        }
        let mut total = 0u64;
        for a in &self.codewords {
            for b in &self.codewords {
                total += hamming_distance(&a[0], &b[0])? as u64;
            }
        }
        Ok(total)
    }

    /// The same code with every codeword xored by `mask`; all cost metrics
    /// are unchanged by this.
    pub fn xor_translate(&self, mask: &BitString) -> Result<Code, CodeError> {
        let mut entries = Vec::with_capacity(self.states.len());
        for (state, words) in self.states.iter().zip(&self.codewords) {
            let translated =
                words.iter().map(|w| w.xor(mask)).collect::<Result<Vec<_>, _>>()?;
            entries.push((state.clone(), translated));
        }
        Ok(Code::from_entries(self.shape, self.model, self.space, entries))
    }

    /// The same code with bit `i` of every codeword moved to position
    /// `perm[i]`; all cost metrics are unchanged by this.
    pub fn permute_bits(&self, perm: &[usize]) -> Result<Code, CodeError> {
        let len = self.shape.total_bits();
        assert_eq!(perm.len(), len, "permutation must cover every bit position");
        let mut entries = Vec::with_capacity(self.states.len());
        for (state, words) in self.states.iter().zip(&self.codewords) {
            let mut moved = Vec::with_capacity(words.len());
            for w in words {
                let mut out = BitString::zeros(len)?;
                for (i, &target) in perm.iter().enumerate() {
                    out = out.with_bit(target, w.bit(i));
                }
                moved.push(out);
            }
            entries.push((state.clone(), moved));
        }
        Ok(Code::from_entries(self.shape, self.model, self.space, entries))
    }

    fn to_doc(&self) -> CodeDoc {
        CodeDoc {
            shape: self.shape,
            model: self.model,
            space: self.space,
            entries: self
                .states
                .iter()
                .zip(&self.codewords)
                .map(|(state, codewords)| CodeEntry {
                    state: state.clone(),
                    codewords: codewords.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("code documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Code, CodeError> {
        serde_json::from_str(text).map_err(|e| CodeError::Document(e.to_string()))
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_doc().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Code {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = CodeDoc::deserialize(deserializer)?;
        Ok(Code::from_entries(
            doc.shape,
            doc.model,
            doc.space,
            doc.entries.into_iter().map(|e| (e.state, e.codewords)).collect(),
        ))
    }
}

/// Packs a k-slot block state into its trivial codeword: the slot values'
/// n-bit binary forms concatenated in slot order, so the codeword's text is
/// the text of the slots. Slot 0 occupies the most significant bits.
pub fn pack_state(state: &BlockState, shape: BlockShape) -> Result<BitString, CodeError> {
    let n = shape.n();
    let k = shape.k() as usize;
    if state.len() != k {
        return Err(ModelError::WrongSlotCount {
            state: state.to_string(),
            got: state.len(),
            want: k,
        }
        .into());
    }
    let mut value: u64 = 0;
    for &slot in state.slots() {
        if slot > shape.max_value() {
            return Err(ModelError::SlotTooWide { value: slot, n }.into());
        }
        value = if n as usize == 64 { slot } else { (value << n) | slot };
    }
    Ok(BitString::from_value(value, shape.total_bits())?)
}

/// Inverse of [`pack_state`].
pub fn unpack_state(word: &BitString, shape: BlockShape) -> Result<BlockState, CodeError> {
    if word.len() != shape.total_bits() {
        return Err(BitError::LengthMismatch(word.len(), shape.total_bits()).into());
    }
    let n = shape.n();
    let k = shape.k() as usize;
    let mut slots = vec![0u64; k];
    let mut value = word.value();
    for slot in slots.iter_mut().rev() {
        *slot = value & shape.max_value();
        value = if (n as usize) >= 64 { 0 } else { value >> n };
    }
    Ok(BlockState::new(slots))
}

/// The baseline code: every canonical block state gets exactly one
/// codeword, the concatenation of its slot values. Injective because
/// distinct canonical states differ in some slot.
pub fn trivial_code(shape: BlockShape, model: MemoryModel) -> Result<Code, CodeError> {
    let states = enumerate_block_states(shape, model)?;
    let mut entries = Vec::with_capacity(states.len());
    for state in states {
        let word = pack_state(&state, shape)?;
        entries.push((state, vec![word]));
    }
    Ok(Code::from_entries(shape, model, StateSpace::Block, entries))
}

/// The membership code for set blocks: bit `i - 1` of the codeword is set
/// iff non-NULL value `i` is stored. Needs `2^n - 1 <= n * k` so every
/// value has a bit. Every add or delete flips exactly one bit, so all
/// write/delete transitions cost 1.
///
/// The code's model is LOA + UoE + SCM write/delete, the setting in which
/// single-flip transitions cover every valid move.
pub fn indicator_code(shape: BlockShape) -> Result<Code, CodeError> {
    let bits = shape.total_bits();
    let values = shape.max_value();
    if values > bits as u64 {
        return Err(CodeError::IndicatorCapacity { values, bits });
    }
    let model = MemoryModel::loads();
    let states = enumerate_block_states(shape, model)?;
    let mut entries = Vec::with_capacity(states.len());
    for state in states {
        let mut word = BitString::zeros(bits)?;
        for &v in state.slots() {
            if v != 0 {
                word = word.with_bit(v as usize - 1, true);
            }
        }
        entries.push((state, vec![word]));
    }
    Ok(Code::from_entries(shape, model, StateSpace::Block, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmodel::Scm;

    fn shape(n: u32, k: u32) -> BlockShape {
        BlockShape::new(n, k).unwrap()
    }

    fn bs(s: &str) -> BitString {
        s.parse().unwrap()
    }

    fn st(slots: &[u64]) -> BlockState {
        BlockState::new(slots.to_vec())
    }

    #[test]
    fn rational_arithmetic() {
        assert_eq!(Rational::new(4, 3).to_string(), "4/3");
        assert_eq!(Rational::new(8, 6), Rational::new(4, 3));
        assert_eq!(Rational::new(6, 3).to_string(), "2");
        assert!(Rational::new(1, 3) < Rational::new(1, 2));
        assert_eq!(Rational::zero().to_f64(), 0.0);
    }

    #[test]
    fn pack_is_slot_concatenation() {
        // state [0,3] at n=2, k=2 reads as "00" + "11"
        let sh = shape(2, 2);
        assert_eq!(pack_state(&st(&[0, 3]), sh).unwrap(), bs("0011"));
        assert_eq!(pack_state(&st(&[3, 0]), sh).unwrap(), bs("1100"));
        assert_eq!(unpack_state(&bs("0011"), sh).unwrap(), st(&[0, 3]));
        for v in 0..16u64 {
            let w = BitString::from_value(v, 4).unwrap();
            assert_eq!(pack_state(&unpack_state(&w, sh).unwrap(), sh).unwrap(), w);
        }
    }

    #[test]
    fn trivial_code_examples() {
        let sh = shape(2, 2);
        let code = trivial_code(sh, MemoryModel::gmm()).unwrap();
        assert_eq!(code.codeword_count(), 16);
        assert_eq!(code.encode(&st(&[0, 3])).unwrap(), &[bs("0011")]);
        code.validate().unwrap();

        // under LOA, (1,2) and (2,1) share the canonical state's codeword
        let loa = MemoryModel::new(true, false, Scm::None);
        let code = trivial_code(sh, loa).unwrap();
        assert!(code.encode(&st(&[1, 2])).is_some());
        assert!(code.encode(&st(&[2, 1])).is_none(), "only canonical states are in the domain");
        code.validate().unwrap();
    }

    #[test]
    fn trivial_code_valid_for_all_models_up_to_3x3() {
        for n in 1..=3 {
            for k in 1..=3 {
                for loa in [false, true] {
                    for uoe in [false, true] {
                        for scm in [Scm::None, Scm::Overwrite, Scm::WriteDelete] {
                            let model = MemoryModel::new(loa, uoe, scm);
                            let code = trivial_code(shape(n, k), model).unwrap();
                            code.validate().unwrap();
                            let report = code.cost_report().unwrap();
                            assert!(report.avg_cost <= Rational::from_integer(report.max_cost as u64));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn validate_reports_defects_with_witnesses() {
        let sh = shape(1, 1);
        let model = MemoryModel::gmm();
        // two states share a codeword
        let code = Code::from_entries(
            sh,
            model,
            StateSpace::Block,
            vec![(st(&[0]), vec![bs("0")]), (st(&[1]), vec![bs("0")])],
        );
        assert!(matches!(code.validate(), Err(CodeDefect::SharedCodeword { .. })));

        // a valid state is missing
        let code = Code::from_entries(sh, model, StateSpace::Block, vec![(st(&[0]), vec![bs("0")])]);
        assert_eq!(code.validate(), Err(CodeDefect::MissingState(st(&[1]))));

        // empty codeword set
        let code = Code::from_entries(
            sh,
            model,
            StateSpace::Block,
            vec![(st(&[0]), vec![bs("0")]), (st(&[1]), vec![])],
        );
        assert_eq!(code.validate(), Err(CodeDefect::EmptyCodewordSet(st(&[1]))));
    }

    #[test]
    fn max_cost_of_trivial_codes() {
        // overwrite: one slot rewritten, so exactly n
        for (n, k) in [(1, 2), (2, 2), (3, 2), (2, 3)] {
            let model = MemoryModel::new(false, false, Scm::Overwrite);
            let code = trivial_code(shape(n, k), model).unwrap();
            assert_eq!(code.max_transition_cost().unwrap(), n, "n={n} k={k}");
        }
        // unrestricted transitions may flip every bit
        for (n, k) in [(1, 2), (2, 2), (1, 3)] {
            let code = trivial_code(shape(n, k), MemoryModel::gmm()).unwrap();
            assert_eq!(code.max_transition_cost().unwrap(), n * k);
        }
    }

    #[test]
    fn indicator_code_costs_one_flip_everywhere() {
        let code = indicator_code(shape(2, 2)).unwrap();
        code.validate().unwrap();
        // set {1,3} -> bits 0 and 2 -> "0101"
        let state = st(&[1, 3]);
        assert_eq!(code.encode(&state).unwrap(), &[bs("0101")]);
        // empty set -> all zeros
        assert_eq!(code.encode(&st(&[0, 0])).unwrap(), &[bs("0000")]);
        let report = code.cost_report().unwrap();
        assert_eq!(report.max_cost, 1);
        assert_eq!(report.avg_cost, Rational::from_integer(1));

        assert!(matches!(
            indicator_code(shape(3, 2)),
            Err(CodeError::IndicatorCapacity { .. })
        ));
    }

    #[test]
    fn avg_cost_examples() {
        // single transition 0 <-> 1
        let code = trivial_code(shape(1, 1), MemoryModel::gmm()).unwrap();
        assert_eq!(code.avg_transition_cost().unwrap(), Rational::from_integer(1));

        // n=2, k=1 overwrite: each state sees distances {1,1,2}
        let model = MemoryModel::new(false, false, Scm::Overwrite);
        let code = trivial_code(shape(2, 1), model).unwrap();
        assert_eq!(code.avg_transition_cost().unwrap(), Rational::new(4, 3));
    }

    #[test]
    fn total_cost_examples() {
        let code = trivial_code(shape(1, 1), MemoryModel::gmm()).unwrap();
        assert_eq!(code.total_cost().unwrap(), 2);

        let code = trivial_code(shape(1, 2), MemoryModel::gmm()).unwrap();
        assert_eq!(code.total_cost().unwrap(), 16);

        // complementing every codeword preserves all pairwise distances
        let mask = bs("11");
        let complemented = code.xor_translate(&mask).unwrap();
        assert_eq!(complemented.total_cost().unwrap(), 16);

        // multi-codeword codes have no total cost
        let sh = shape(1, 1);
        let multi = Code::from_entries(
            sh,
            MemoryModel::gmm(),
            StateSpace::Block,
            vec![(st(&[0]), vec![bs("0")]), (st(&[1]), vec![bs("1")])],
        );
        assert!(multi.total_cost().is_ok());
        let multi = Code::from_entries(
            sh,
            MemoryModel::gmm(),
            StateSpace::Block,
            vec![(st(&[0]), vec![bs("0"), bs("1")]), (st(&[1]), vec![])],
        );
        assert!(matches!(multi.total_cost(), Err(CodeError::MultiCodeword(_))));
    }

    #[test]
    fn metrics_invariant_under_translation_and_permutation() {
        let model = MemoryModel::new(false, false, Scm::Overwrite);
        let code = trivial_code(shape(2, 2), model).unwrap();
        let base = code.cost_report().unwrap();

        let translated = code.xor_translate(&bs("1010")).unwrap();
        let t = translated.cost_report().unwrap();
        assert_eq!((t.max_cost, t.avg_cost, t.total_cost), (base.max_cost, base.avg_cost, base.total_cost));

        let permuted = code.permute_bits(&[2, 0, 3, 1]).unwrap();
        let p = permuted.cost_report().unwrap();
        assert_eq!((p.max_cost, p.avg_cost, p.total_cost), (base.max_cost, base.avg_cost, base.total_cost));
    }

    #[test]
    fn avg_equals_max_iff_costs_uniform() {
        // indicator: every transition costs exactly 1
        let code = indicator_code(shape(2, 2)).unwrap();
        let report = code.cost_report().unwrap();
        assert_eq!(Rational::from_integer(report.max_cost as u64), report.avg_cost);

        // trivial GMM n=1,k=2: costs vary, so avg < max
        let code = trivial_code(shape(1, 2), MemoryModel::gmm()).unwrap();
        let report = code.cost_report().unwrap();
        assert!(report.avg_cost < Rational::from_integer(report.max_cost as u64));
    }

    #[test]
    fn code_json_roundtrip() {
        let code = indicator_code(shape(2, 2)).unwrap();
        let text = code.to_json();
        let back = Code::from_json(&text).unwrap();
        assert_eq!(code, back);
        back.validate().unwrap();
        assert!(Code::from_json("{\"bogus\":true}").is_err());
    }

    #[test]
    fn collection_space_code_metrics() {
        // hand-build a code over set collections at n=1, k=3 (4 states)
        let sh = shape(1, 3);
        let model = MemoryModel::loads();
        let states = enumerate_states(sh, model).unwrap();
        assert_eq!(states.len(), 4);
        let entries: Vec<_> = states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                (s.clone(), vec![BitString::from_value(i as u64, 3).unwrap()])
            })
            .collect();
        let code = Code::from_entries(sh, model, StateSpace::Collection, entries);
        code.validate().unwrap();
        let report = code.cost_report().unwrap();
        assert!(report.max_cost >= 1);
        assert_eq!(report.codeword_count, 4);
    }
}

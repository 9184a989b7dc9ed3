//! Semi-linear set codes: a basis codeword per slot value, sets encoded as
//! the xor of their members' columns.
//!
//! A [`BasisMatrix`] holds one `n * k`-bit column per value `x` in
//! `[0, 2^n)`; the codeword of a set is the xor of its members' columns
//! (empty set: all zeros). Decoding stays unambiguous for sets of size at
//! most `k` exactly when no non-empty subset of at most `2k` columns xors
//! to zero; two colliding sets would otherwise exhibit such a subset via
//! their symmetric difference. [`BasisMatrix::verify`] checks that
//! condition exhaustively and returns a witness subset when it fails.
//!
//! Write costs fall out of the algebra: adding or deleting value `x` costs
//! the Hamming weight of column `x`, and overwriting `x` with `y` costs
//! the weight of `column_x ^ column_y`.
//!
//! The matrix has `2^n` columns and no smaller factored representation: a
//! rank argument shows no narrower matrix composed with a per-value vector
//! map can reproduce all `2^n` independent column choices, so the storage
//! cost is inherent and the module only ever materializes matrices at
//! experiment scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::bitspace::{BitError, BitString};
use crate::blockmodel::{enumerate_block_states, BlockShape, MemoryModel, ModelError};
use crate::codecraft::{Code, Rational, StateSpace};
use crate::comb::binomial;

/// Subset-search budget for [`BasisMatrix::verify`].
pub const VERIFY_BUDGET: u128 = 1 << 26;

#[derive(Debug, Error)]
pub enum SemilinearError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bits(#[from] BitError),
    #[error("matrix has {got} columns, expected 2^n = {want}")]
    WrongColumnCount { got: usize, want: u128 },
    #[error("column {index} has length {got}, expected n*k = {want}")]
    ColumnLength { index: usize, got: usize, want: usize },
    #[error("{got} values exceed the set capacity k={k}")]
    TooManyValues { got: usize, k: u32 },
    #[error("duplicate value {0} in a set")]
    DuplicateValue(u64),
    #[error("value {value} does not fit in {n}-bit slots")]
    ValueOutOfRange { value: u64, n: u32 },
    #[error("verification needs {needed} subset checks, over the budget of {limit}; use smaller n or k")]
    BudgetExceeded { needed: u128, limit: u128 },
    #[error("invalid matrix document: {0}")]
    Document(String),
}

/// Outcome of the column-independence check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Independence {
    /// No non-empty subset of at most 2k columns xors to zero; sets of
    /// size <= k encode injectively.
    Holds,
    /// A zero-xor subset, as sorted column indices.
    Violated { witness: Vec<u64> },
}

impl Independence {
    pub fn holds(&self) -> bool {
        matches!(self, Independence::Holds)
    }
}

/// One basis codeword per slot value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisMatrix {
    shape: BlockShape,
    columns: Vec<BitString>,
}

impl BasisMatrix {
    pub fn new(shape: BlockShape, columns: Vec<BitString>) -> Result<Self, SemilinearError> {
        let want = shape.alphabet();
        if columns.len() as u128 != want {
            return Err(SemilinearError::WrongColumnCount { got: columns.len(), want });
        }
        for (index, col) in columns.iter().enumerate() {
            if col.len() != shape.total_bits() {
                return Err(SemilinearError::ColumnLength {
                    index,
                    got: col.len(),
                    want: shape.total_bits(),
                });
            }
        }
        Ok(BasisMatrix { shape, columns })
    }

    pub fn shape(&self) -> BlockShape {
        self.shape
    }

    pub fn columns(&self) -> &[BitString] {
        &self.columns
    }

    pub fn column(&self, value: u64) -> &BitString {
        &self.columns[value as usize]
    }

    fn check_set(&self, values: &[u64]) -> Result<Vec<u64>, SemilinearError> {
        if values.len() > self.shape.k() as usize {
            return Err(SemilinearError::TooManyValues { got: values.len(), k: self.shape.k() });
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(SemilinearError::DuplicateValue(pair[0]));
            }
        }
        for &v in &sorted {
            if v > self.shape.max_value() {
                return Err(SemilinearError::ValueOutOfRange { value: v, n: self.shape.n() });
            }
        }
        Ok(sorted)
    }

    /// The codeword of a set of at most k distinct values: the xor of
    /// their columns. The empty set encodes to all zeros.
    pub fn encode_set(&self, values: &[u64]) -> Result<BitString, SemilinearError> {
        let sorted = self.check_set(values)?;
        let mut word = BitString::zeros(self.shape.total_bits())?;
        for v in sorted {
            word = word.xor(self.column(v))?;
        }
        Ok(word)
    }

    /// Bit flips needed to move between two encodable sets. Adding or
    /// deleting `x` costs `weight(column_x)`; overwriting `x` with `y`
    /// costs `weight(column_x ^ column_y)`.
    pub fn write_cost(&self, from: &[u64], to: &[u64]) -> Result<u32, SemilinearError> {
        let a = self.encode_set(from)?;
        let b = self.encode_set(to)?;
        Ok(a.xor(&b)?.weight())
    }

    /// Number of subset checks [`BasisMatrix::verify`] would perform.
    pub fn verify_work(&self) -> Option<u128> {
        let a = self.shape.alphabet();
        let cap = (2 * self.shape.k() as u128).min(a);
        let mut total: u128 = 0;
        for j in 1..=cap {
            total = total.checked_add(binomial(a, j)?)?;
        }
        Some(total)
    }

    /// Exhaustively checks that no non-empty subset of at most `2k`
    /// columns xors to zero; equivalently, every `2k+1` columns are
    /// linearly independent, which makes [`BasisMatrix::encode_set`]
    /// injective over sets of size at most `k`.
    pub fn verify(&self) -> Result<Independence, SemilinearError> {
        let needed = self.verify_work().ok_or(SemilinearError::BudgetExceeded {
            needed: u128::MAX,
            limit: VERIFY_BUDGET,
        })?;
        if needed > VERIFY_BUDGET {
            return Err(SemilinearError::BudgetExceeded { needed, limit: VERIFY_BUDGET });
        }
        let cap = (2 * self.shape.k() as usize).min(self.columns.len());
        let zero = BitString::zeros(self.shape.total_bits())?;
        let mut stack: Vec<u64> = Vec::with_capacity(cap);
        if let Some(witness) = self.dfs_zero_subset(&zero, 0, cap, &mut stack)? {
            return Ok(Independence::Violated { witness });
        }
        Ok(Independence::Holds)
    }

    fn dfs_zero_subset(
        &self,
        acc: &BitString,
        next: u64,
        depth_left: usize,
        stack: &mut Vec<u64>,
    ) -> Result<Option<Vec<u64>>, SemilinearError> {
        if depth_left == 0 {
            return Ok(None);
        }
        for v in next..self.columns.len() as u64 {
            let folded = acc.xor(self.column(v))?;
            stack.push(v);
            if folded.weight() == 0 {
                return Ok(Some(stack.clone()));
            }
            if let Some(w) = self.dfs_zero_subset(&folded, v + 1, depth_left - 1, stack)? {
                return Ok(Some(w));
            }
            stack.pop();
        }
        Ok(None)
    }

    /// A single-codeword block code over LOA+UoE write/delete states,
    /// encoding each block's set of stored values through this matrix.
    /// Injective whenever [`BasisMatrix::verify`] holds.
    pub fn block_code(&self) -> Result<Code, SemilinearError> {
        let model = MemoryModel::loads();
        let states = enumerate_block_states(self.shape, model)?;
        let mut entries = Vec::with_capacity(states.len());
        for state in states {
            let values: Vec<u64> = state.slots().iter().copied().filter(|&v| v != 0).collect();
            let word = self.encode_set(&values)?;
            entries.push((state, vec![word]));
        }
        Ok(Code::from_entries(self.shape, model, StateSpace::Block, entries))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matrix documents always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, SemilinearError> {
        serde_json::from_str(text).map_err(|e| SemilinearError::Document(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    shape: BlockShape,
    columns: Vec<BitString>,
}

impl Serialize for BasisMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixDoc { shape: self.shape, columns: self.columns.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BasisMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = MatrixDoc::deserialize(deserializer)?;
        BasisMatrix::new(doc.shape, doc.columns).map_err(de::Error::custom)
    }
}

/// Outcome of a randomized matrix search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixSearchReport {
    pub shape: BlockShape,
    pub trials: u64,
    pub seed: u64,
    /// Trials whose matrix passed the independence check.
    pub passing: u64,
    /// Best passing matrix by (max column weight, then average), if any.
    pub best: Option<BasisMatrix>,
    pub best_max_write_cost: Option<u32>,
    pub best_avg_write_cost: Option<Rational>,
}

/// Samples `trials` random matrices, keeps those passing the independence
/// check, and scores them by worst single-value write cost (max column
/// weight), breaking ties by the average. Deterministic in `seed`; finding
/// no passing matrix is an ordinary outcome, not an error.
pub fn search_matrix(
    shape: BlockShape,
    trials: u64,
    seed: u64,
) -> Result<MatrixSearchReport, SemilinearError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bits = shape.total_bits();
    let mask = if bits == 64 { u64::MAX } else { (1u64 << bits) - 1 };
    let column_count = shape.alphabet() as usize;
    let mut report = MatrixSearchReport {
        shape,
        trials,
        seed,
        passing: 0,
        best: None,
        best_max_write_cost: None,
        best_avg_write_cost: None,
    };
    for _ in 0..trials {
        let columns: Vec<BitString> = (0..column_count)
            .map(|_| BitString::from_value(rng.gen::<u64>() & mask, bits))
            .collect::<Result<_, _>>()?;
        let matrix = BasisMatrix::new(shape, columns)?;
        if !matrix.verify()?.holds() {
            continue;
        }
        report.passing += 1;
        let max_cost = matrix.columns().iter().map(|c| c.weight()).max().unwrap();
        let weight_sum: u64 = matrix.columns().iter().map(|c| c.weight() as u64).sum();
        let avg_cost = Rational::new(weight_sum, column_count as u64);
        let better = match (report.best_max_write_cost, report.best_avg_write_cost) {
            (None, _) => true,
            (Some(best_max), Some(best_avg)) => {
                (max_cost, avg_cost) < (best_max, best_avg)
            }
            _ => unreachable!("best scores are set together"),
        };
        if better {
            report.best = Some(matrix);
            report.best_max_write_cost = Some(max_cost);
            report.best_avg_write_cost = Some(avg_cost);
        }
    }
    Ok(report)
}

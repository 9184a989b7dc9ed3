//! Code-search engines: does any code beat the trivial encoding?
//!
//! Three engines probe that question empirically and report what they saw;
//! none of them asserts an answer in advance.
//!
//! - [`exhaustive_scm_search`]: at `n*k <= 3`, walks *every* bijective
//!   code of the pure single-cell-overwrite model modulo the two proven
//!   cost symmetries (xor translation and bit permutation), so its verdict
//!   for those shapes is exact.
//! - [`swap_search`]: seeded hill climbing over codeword swaps of a
//!   bijective block code, with optional random restarts.
//! - [`redundant_search`]: starts from the rank-compressed code of an
//!   order-agnostic model and spends the leftover bit-strings as extra
//!   codewords, reassigning them while the objective improves.
//!
//! Every examined assignment is a valid code by construction: swaps keep
//! bijectivity, and redundancy moves only touch spare words while each
//! state keeps its base codeword.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

use crate::bitspace::BitString;
use crate::blockmodel::{count_states, BlockShape, MemoryModel, ModelError, Scm};
use crate::codecraft::{Code, CodeError, CostReport, Rational, StateSpace, TransitionTable};
use crate::setcodec::{compressed_code, CodecError};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("exhaustive search covers n*k <= 3 only, got {0} bits; use swap search instead")]
    TooLargeForExhaustive(usize),
    #[error(
        "no redundancy at this shape: {states} states against {words} bit-strings; \
         redundancy search needs spare words (order-agnostic models below full rate)"
    )]
    NoRedundancy { states: u128, words: u128 },
    #[error("cannot parse objective from {0:?}, expected \"max\" or \"avg\"")]
    BadObjective(String),
}

/// Which cost the search minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Max,
    Avg,
}

impl Objective {
    /// The objective's value in a report, as an exact rational.
    pub fn value(&self, report: &CostReport) -> Rational {
        match self {
            Objective::Max => Rational::from_integer(report.max_cost as u64),
            Objective::Avg => report.avg_cost,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Max => f.write_str("max"),
            Objective::Avg => f.write_str("avg"),
        }
    }
}

impl FromStr for Objective {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(Objective::Max),
            "avg" => Ok(Objective::Avg),
            other => Err(SearchError::BadObjective(other.to_string())),
        }
    }
}

/// Outcome of one search run, reproducible from the embedded settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchReport {
    pub shape: BlockShape,
    pub model: MemoryModel,
    pub space: StateSpace,
    pub objective: Objective,
    pub seed: u64,
    pub iterations: u64,
    pub restarts: u64,
    /// Configured wall-clock cutoff, if any (echoed, never measured).
    pub wall_budget_ms: Option<u64>,
    pub codes_examined: u64,
    pub baseline: CostReport,
    pub best_found: CostReport,
    /// Whether the best code strictly beats the baseline on the objective.
    pub improved: bool,
    /// Bit positions of the baseline code that depend on a single slot.
    pub isolated_bits: Vec<usize>,
    pub best_code: Code,
}

fn is_improved(objective: Objective, baseline: &CostReport, best: &CostReport) -> bool {
    objective.value(best) < objective.value(baseline)
}

/// Bit positions whose value, across every state of a single-codeword
/// block code, is a function of one slot's content alone. In the trivial
/// code every bit is isolated; a code with no isolated bits genuinely
/// mixes slots.
pub fn isolated_bits(code: &Code) -> Vec<usize> {
    if code.space() != StateSpace::Block || !code.is_single_codeword() {
        return Vec::new();
    }
    let shape = code.shape();
    let k = shape.k() as usize;
    let bits = shape.total_bits();
    let mut isolated = Vec::new();
    for bit in 0..bits {
        let mut depends_on_single_slot = false;
        'slots: for slot in 0..k {
            let mut by_value: std::collections::BTreeMap<u64, bool> = Default::default();
            for (state, words) in code.states().iter().zip(code.codeword_sets()) {
                let value = state.slots()[slot];
                let b = words[0].bit(bit);
                match by_value.get(&value) {
                    Some(&prev) if prev != b => continue 'slots,
                    _ => {
                        by_value.insert(value, b);
                    }
                }
            }
            depends_on_single_slot = true;
            break;
        }
        if depends_on_single_slot {
            isolated.push(bit);
        }
    }
    isolated
}

fn code_from_assignment(
    table: &TransitionTable,
    words: &[Vec<BitString>],
) -> Code {
    let entries = table
        .states()
        .iter()
        .cloned()
        .zip(words.iter().cloned())
        .collect();
    Code::from_entries(table.shape(), table.model(), table.space(), entries)
}

/// Exact search over every bijective code of the pure overwrite-SCM model
/// at `n*k <= 3`, modulo xor translation (the first state's codeword is
/// pinned to all-zeros) and bit permutation (only lexicographically
/// canonical assignments are scored). Deterministic; both symmetries are
/// cost-preserving, so the reported minimum is the true minimum.
pub fn exhaustive_scm_search(
    shape: BlockShape,
    objective: Objective,
) -> Result<SearchReport, SearchError> {
    let bits = shape.total_bits();
    if bits > 3 {
        return Err(SearchError::TooLargeForExhaustive(bits));
    }
    let model = MemoryModel::new(false, false, Scm::Overwrite);
    let table = TransitionTable::build(shape, model, StateSpace::Block)?;
    let state_count = table.states().len();

    let pool: Vec<BitString> = crate::bitspace::BitString::all(bits)
        .expect("tiny length")
        .collect();
    debug_assert_eq!(pool.len(), state_count);

    let baseline_code = crate::codecraft::trivial_code(shape, model)?;
    let baseline = baseline_code.cost_report()?;
    let isolated = isolated_bits(&baseline_code);

    // all permutations of positions 0..bits, for canonical-form checks
    let bit_perms = permutations(bits);

    let mut best: Option<(Rational, Vec<Vec<BitString>>, CostReport)> = None;
    let mut examined = 0u64;

    // assign words to states[1..]; states[0] always gets pool[0] (all zeros)
    let mut rest: Vec<usize> = (1..state_count).collect();
    let mut scratch = vec![Vec::new(); state_count];
    permute_in_place(&mut rest, 0, &mut |perm: &[usize]| {
        // canonical under bit permutation: no relabeling of bit positions
        // may produce a lexicographically smaller word sequence
        let words_of = |pi: &[usize]| -> Vec<u64> {
            let mut out = Vec::with_capacity(perm.len());
            for &w in perm {
                let mut v = 0u64;
                for (i, &target) in pi.iter().enumerate() {
                    if pool[w].bit(i) {
                        v |= 1 << target;
                    }
                }
                out.push(v);
            }
            out
        };
        let identity: Vec<usize> = (0..bits).collect();
        let base_seq = words_of(&identity);
        for pi in &bit_perms {
            if words_of(pi) < base_seq {
                return; // a smaller representative exists; skip this one
            }
        }
        examined += 1;
        scratch[0] = vec![pool[0]];
        for (i, &w) in perm.iter().enumerate() {
            scratch[i + 1] = vec![pool[w]];
        }
        let report = table.evaluate(&scratch).expect("assignment matches the domain");
        let score = objective.value(&report);
        let better = match &best {
            None => true,
            Some((best_score, _, _)) => score < *best_score,
        };
        if better {
            best = Some((score, scratch.clone(), report));
        }
    });

    let (_, best_words, best_report) = best.expect("at least one code exists");
    let best_code = code_from_assignment(&table, &best_words);
    debug_assert!(best_code.is_valid_code());
    let improved = is_improved(objective, &baseline, &best_report);
    Ok(SearchReport {
        shape,
        model,
        space: StateSpace::Block,
        objective,
        seed: 0,
        iterations: 0,
        restarts: 0,
        wall_budget_ms: None,
        codes_examined: examined,
        baseline,
        best_found: best_report,
        improved,
        isolated_bits: isolated,
        best_code,
    })
}

fn permutations(len: usize) -> Vec<Vec<usize>> {
    let mut items: Vec<usize> = (0..len).collect();
    let mut out = Vec::new();
    permute_in_place(&mut items, 0, &mut |p: &[usize]| out.push(p.to_vec()));
    out
}

fn permute_in_place<F: FnMut(&[usize])>(items: &mut Vec<usize>, at: usize, visit: &mut F) {
    if at == items.len() {
        visit(items);
        return;
    }
    for i in at..items.len() {
        items.swap(at, i);
        permute_in_place(items, at + 1, visit);
        items.swap(at, i);
    }
}

/// Seeded hill climbing over codeword swaps of a bijective block code.
///
/// Restart 0 climbs from the trivial code; every further restart climbs
/// from a seeded random shuffle. A proposal swaps two entries of the full
/// word pool (used or spare) and is accepted only on strict objective
/// improvement. Identical settings give identical reports.
pub fn swap_search(
    shape: BlockShape,
    model: MemoryModel,
    objective: Objective,
    seed: u64,
    iterations: u64,
    restarts: u64,
    wall_budget_ms: Option<u64>,
) -> Result<SearchReport, SearchError> {
    let table = TransitionTable::build(shape, model, StateSpace::Block)?;
    let state_count = table.states().len();
    let bits = shape.total_bits();
    let pool: Vec<BitString> = crate::bitspace::BitString::all(bits)
        .map_err(CodeError::from)?
        .collect();

    let baseline_code = crate::codecraft::trivial_code(shape, model)?;
    let baseline = baseline_code.cost_report()?;
    let isolated = isolated_bits(&baseline_code);

    // arrangement[i] = pool index held by state i (entries past state_count
    // are the spare words)
    let trivial_arrangement: Vec<usize> = {
        let mut arr: Vec<usize> = Vec::with_capacity(pool.len());
        let mut used = vec![false; pool.len()];
        for state in table.states() {
            let word = crate::codecraft::pack_state(state, shape)?;
            let idx = word.value() as usize;
            arr.push(idx);
            used[idx] = true;
        }
        arr.extend((0..pool.len()).filter(|&i| !used[i]));
        arr
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let started = Instant::now();
    let mut examined = 0u64;
    let mut best: Option<(Rational, Vec<usize>, CostReport)> = None;

    let evaluate = |arrangement: &[usize]| -> CostReport {
        let words: Vec<Vec<BitString>> =
            (0..state_count).map(|i| vec![pool[arrangement[i]]]).collect();
        table.evaluate(&words).expect("assignment matches the domain")
    };

    for restart in 0..=restarts {
        let mut arrangement = trivial_arrangement.clone();
        if restart > 0 {
            // seeded shuffle of the whole pool
            for i in (1..arrangement.len()).rev() {
                let j = rng.gen_range(0..=i);
                arrangement.swap(i, j);
            }
        }
        let mut current = evaluate(&arrangement);
        examined += 1;
        if best.as_ref().map(|(s, _, _)| objective.value(&current) < *s).unwrap_or(true) {
            best = Some((objective.value(&current), arrangement.clone(), current.clone()));
        }
        for _ in 0..iterations {
            if let Some(limit) = wall_budget_ms {
                if started.elapsed().as_millis() as u64 >= limit {
                    break;
                }
            }
            let i = rng.gen_range(0..pool.len());
            let j = rng.gen_range(0..pool.len());
            if i == j || (i >= state_count && j >= state_count) {
                continue; // nothing observable changes
            }
            arrangement.swap(i, j);
            let candidate = evaluate(&arrangement);
            examined += 1;
            if objective.value(&candidate) < objective.value(&current) {
                current = candidate;
                let score = objective.value(&current);
                if best.as_ref().map(|(s, _, _)| score < *s).unwrap_or(true) {
                    best = Some((score, arrangement.clone(), current.clone()));
                }
            } else {
                arrangement.swap(i, j); // revert
            }
        }
    }

    let (_, best_arrangement, best_report) = best.expect("restart 0 always evaluates");
    let words: Vec<Vec<BitString>> =
        (0..state_count).map(|i| vec![pool[best_arrangement[i]]]).collect();
    let best_code = code_from_assignment(&table, &words);
    debug_assert!(best_code.is_valid_code());
    let improved = is_improved(objective, &baseline, &best_report);
    Ok(SearchReport {
        shape,
        model,
        space: StateSpace::Block,
        objective,
        seed,
        iterations,
        restarts,
        wall_budget_ms,
        codes_examined: examined,
        baseline,
        best_found: best_report,
        improved,
        isolated_bits: isolated,
        best_code,
    })
}

/// Seeded local search over multi-codeword assignments of an
/// order-agnostic model's compressed code.
///
/// The baseline is the single-codeword compressed code; the spare
/// bit-strings left by its redundancy are offered as extra codewords. A
/// proposal attaches a spare word to a state, moves an extra word between
/// states, or retires one; only strict objective improvements are kept.
pub fn redundant_search(
    shape: BlockShape,
    model: MemoryModel,
    objective: Objective,
    seed: u64,
    iterations: u64,
    wall_budget_ms: Option<u64>,
) -> Result<SearchReport, SearchError> {
    let words_total = 1u128 << shape.total_bits();
    let states_total = count_states(shape, model)?;
    if states_total >= words_total {
        return Err(SearchError::NoRedundancy { states: states_total, words: words_total });
    }
    let base = compressed_code(shape, model)?;
    let baseline = base.cost_report()?;
    let table = TransitionTable::build(shape, model, StateSpace::Collection)?;
    let state_count = table.states().len();
    let bits = shape.total_bits();
    let pool: Vec<BitString> = crate::bitspace::BitString::all(bits)
        .map_err(CodeError::from)?
        .collect();

    // owner[w]: None = spare, Some(state) = assigned; base words never move
    let mut owner: Vec<Option<usize>> = vec![None; pool.len()];
    let mut is_base = vec![false; pool.len()];
    for (i, state) in table.states().iter().enumerate() {
        let word = base.encode(state).expect("compressed code covers the domain")[0];
        owner[word.value() as usize] = Some(i);
        is_base[word.value() as usize] = true;
    }

    let words_of = |owner: &[Option<usize>]| -> Vec<Vec<BitString>> {
        let mut words: Vec<Vec<BitString>> = vec![Vec::new(); state_count];
        for (w, o) in owner.iter().enumerate() {
            if let Some(state) = o {
                words[*state].push(pool[w]);
            }
        }
        words
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let started = Instant::now();
    let mut current = baseline.clone();
    let mut examined = 1u64;
    let mut best_owner = owner.clone();
    let mut best_report = current.clone();

    for _ in 0..iterations {
        if let Some(limit) = wall_budget_ms {
            if started.elapsed().as_millis() as u64 >= limit {
                break;
            }
        }
        let w = rng.gen_range(0..pool.len());
        if is_base[w] {
            continue;
        }
        // target: one of the states, or "spare" (retire the word)
        let target = rng.gen_range(0..=state_count);
        let new_owner = if target == state_count { None } else { Some(target) };
        if owner[w] == new_owner {
            continue;
        }
        let previous = owner[w];
        owner[w] = new_owner;
        let candidate = table.evaluate(&words_of(&owner)).expect("assignment matches the domain");
        examined += 1;
        if objective.value(&candidate) < objective.value(&current) {
            current = candidate;
            if objective.value(&current) < objective.value(&best_report) {
                best_owner = owner.clone();
                best_report = current.clone();
            }
        } else {
            owner[w] = previous;
        }
    }

    let best_code = code_from_assignment(&table, &words_of(&best_owner));
    debug_assert!(best_code.is_valid_code());
    let improved = is_improved(objective, &baseline, &best_report);
    Ok(SearchReport {
        shape,
        model,
        space: StateSpace::Collection,
        objective,
        seed,
        iterations,
        restarts: 0,
        wall_budget_ms,
        codes_examined: examined,
        baseline,
        best_found: best_report,
        improved,
        isolated_bits: Vec::new(),
        best_code,
    })
}

impl SearchReport {
    /// One CSV summary row; see [`SearchReport::csv_header`].
    pub fn csv_row(&self) -> Vec<String> {
        vec![
            self.shape.n().to_string(),
            self.shape.k().to_string(),
            self.model.to_string(),
            self.objective.to_string(),
            self.seed.to_string(),
            self.iterations.to_string(),
            self.restarts.to_string(),
            self.codes_examined.to_string(),
            self.baseline.max_cost.to_string(),
            self.baseline.avg_cost.to_string(),
            self.best_found.max_cost.to_string(),
            self.best_found.avg_cost.to_string(),
            self.improved.to_string(),
        ]
    }

    pub fn csv_header() -> Vec<&'static str> {
        vec![
            "n",
            "k",
            "model",
            "objective",
            "seed",
            "iterations",
            "restarts",
            "codes_examined",
            "baseline_max",
            "baseline_avg",
            "best_max",
            "best_avg",
            "improved",
        ]
    }
}

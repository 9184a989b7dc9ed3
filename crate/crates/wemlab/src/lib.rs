//! A laboratory for write-efficient memory coding.
//!
//! On storage hardware where flipping a bit is the dominant cost, the shape
//! of a data structure's *valid* local states and transitions is worth real
//! energy: a code only has to keep reachable states close together in
//! Hamming space, not all states. This crate models local memory blocks of
//! `k` slots holding `n`-bit values, the eight memory models generated by
//! local order agnosticism (LOA), uniqueness of elements (UoE), and single
//! cell modification (SCM), and the machinery needed to experiment with
//! codes over them:
//!
//! - [`bitspace`]: fixed-length bit strings and Hamming-ball geometry.
//! - [`blockmodel`]: block states, validity, canonical forms, exhaustive
//!   enumeration, closed-form state/transition counting, and rates.
//! - [`codecraft`]: codes from block states to codeword sets, with
//!   maximum/average transition-cost and total-cost metrics.
//! - [`setcodec`]: ranking/unranking of sets and multisets and the
//!   compressed code built from ranks.
//! - [`semilinear`]: xor-of-basis-columns set encodings, the 2k+1 column
//!   independence check, and randomized matrix search.
//! - [`search`]: exhaustive, swap-based, and redundancy-exploiting code
//!   search engines with reproducible reports.
//! - [`flipsim`]: a bit-flip-accounting memory running a linear-probing
//!   hash table under pluggable block encodings.

pub mod bitspace;
pub mod blockmodel;
pub mod codecraft;
pub mod comb;
pub mod flipsim;
pub mod report;
pub mod search;
pub mod semilinear;
pub mod setcodec;

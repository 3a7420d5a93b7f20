//! Additive combinatorics over GF(2)^n and random Cayley sum graphs.
//!
//! Elements of GF(2)^n are `u32` words with XOR as addition. Sets of
//! elements are dense bitsets ([`ElemSet`]), subspaces are kept as reduced
//! row echelon bases ([`Subspace`]).

pub mod cayley;
pub mod clique;
pub mod error;
pub mod experiments;
pub mod freiman;
pub mod gf2;
pub mod moments;
pub(crate) mod ratio_serde;
pub mod rng;
pub mod sumset;

pub use cayley::{from_generators, sample_cayley, sample_generators, CayleyGraph};
pub use clique::{
    chromatic_bracket, coset_coloring, independence_number, max_clique, subspace_cliques, ChromaticBracket,
    CliqueOutcome, Coloring, SubspaceCliqueReport,
};
pub use error::{Error, Result};
pub use experiments::{classify_n, density_measure, run_experiment, run_trial, ExperimentConfig, NClass, TrialRecord};
pub use freiman::{census_skl, freiman_dimension, is_freiman_isomorphic, tail_exponent};
pub use gf2::{enumerate_subspaces, gaussian_binomial, span, ElemSet, Gf2Vec, Subspace};
pub use moments::{expected_m, moment_report, variance_m, MomentReport};
pub use sumset::{kneser_check, restricted_sumset, sandwich_check, sumset, sym};

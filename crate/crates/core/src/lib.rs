//! Finite point processes represented by Janossy densities on a discrete
//! state space.
//!
//! * [`combinatorics`]: subsets, set partitions, multisets, Bell numbers.
//! * [`series`]: the higher-order product, chain, reciprocal and quotient
//!   rules on scalar power series, with long division as an oracle.
//! * [`process`]: processes, generating functional evaluation, fixtures.
//! * [`deconvolution`]: superposition (`G₁·G₂`) and deconvolution (`G/G₁`).
//! * [`format`]: the JSON process file format and report encoding.
//!
//! Every formula is generic over [`Scalar`]: exact [`Rational`] arithmetic or
//! `f64`. With the default `parallel` feature, per-target work in
//! [`deconvolution`] runs on rayon; see [`exec::Execution`].

pub mod combinatorics;
pub mod deconvolution;
pub mod error;
pub mod exec;
pub mod format;
pub mod process;
pub mod scalar;
pub mod series;

pub use combinatorics::{
    bell_number, canonicalize, enumerate_partitions, enumerate_subsets, IndexSubset, Multiset,
    SetPartition,
};
pub use deconvolution::{
    deconvolve, deconvolve_with, pointwise_quotient_check, superpose, superpose_with,
    DeconvolutionReport, Options,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use format::{parse_process, process_to_json, report_to_json, AnyProcess, JsonScalar};
pub use process::{
    janossy_consistency_check, normalization_mass, pgfl_eval, poisson_process, random_process,
    JanossyProcess, StateSpace, TestFunction,
};
pub use scalar::{NumericMode, Rational, Scalar};
pub use series::{
    faadibruno_nth, finite_difference_differential, leibniz_nth, quotient_nth, reciprocal_nth,
    series_div, series_mul, DerivativeVector, PowerSeries,
};

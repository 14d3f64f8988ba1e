//! Exact distributions for the coalescent site frequency spectrum.
//!
//! The genealogy of a sample is encoded by the block-counting process, whose
//! branch lengths per i-ton class form a multivariate phase-type vector.
//! Poisson mutations on those branch lengths give the SFS. From there the
//! crate derives discrete phase-type laws for 0-1 and integer weighted
//! statistics, moments and the best linear unbiased estimator of the
//! mutation rate, and CDFs of arbitrary linear statistics (neutrality tests)
//! through characteristic-function inversion.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blockcounting;
pub mod error;
pub mod estimators;
pub mod intweight;
pub mod inversion;
pub mod linalg;
pub mod mphstar;
pub mod phasetype;
pub mod sfs;
pub mod simulate;

pub use blockcounting::{build_model, state_count, BlockCountingModel, StateVector};
pub use error::{Error, Result};
pub use estimators::{EstimatorKind, EstimatorReport, WeightedStatistic};
pub use intweight::IntWeightedLaw;
pub use inversion::{CdfTable, InversionGrid};
pub use mphstar::MphRep;
pub use phasetype::{ContPhaseType, DiscPhaseType, RewardVector};
pub use sfs::SfsModel;
pub use simulate::{SimConfig, SimSample};

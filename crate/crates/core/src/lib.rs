//! Landscape-aware optimizer performance prediction with exact Shapley
//! explanations.
//!
//! The crate covers the full desk-scale pipeline:
//!
//! * [`bbob`] — the 24 single-objective continuous benchmark functions with
//!   seeded instance transformations,
//! * [`sampling`] — seeded maximin-improved Latin hypercube designs,
//! * [`ela`] — exploratory landscape analysis feature groups computed from a
//!   design (plus evaluator-backed groups that sample extra points),
//! * [`forest`] — regression trees and random forests with the
//!   mean-absolute-error split criterion, single-target (STR) and
//!   multi-target (MTR),
//! * [`shap`] — exact per-instance Shapley attributions for trees and
//!   forests, with a brute-force oracle,
//! * [`pipeline`] — dataset assembly, leave-one-instance-out cross
//!   validation and the per-problem MAE report,
//! * [`analytics`] — global/local importance artifacts, top-k intersections,
//!   per-fold representation vectors and a t-SNE embedding.

pub mod analytics;
pub mod bbob;
pub mod ela;
pub mod error;
pub mod forest;
pub mod linalg;
pub mod pipeline;
pub mod sampling;
pub mod seed;
pub mod shap;
pub mod table;

pub use error::{Error, Result};

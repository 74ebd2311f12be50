//! matilda — career-inequality measurement for bibliographic corpora.
//!
//! The library reconstructs author careers from publication and citation
//! records and measures how unequal those careers become:
//!
//! - [`corpus`] ingests publications, links citations, and assigns authors
//!   to start-year cohorts.
//! - [`careers`] turns a corpus into per-author career time series and
//!   field-level descriptives.
//! - [`inequality`] computes Gini coefficients per cohort and career age,
//!   and gender gaps via the Mann-Whitney U test and Cliff's d.
//! - [`matthew`] fits the cumulative-advantage scaling law (exponent and
//!   lower cutoff) per cohort and career age.
//! - [`indices`] provides the h-index, source h5-index, and top-source
//!   membership used as features.
//! - [`features`] assembles the early-career feature matrix plus dropout
//!   and success labels, with robust standardization.
//! - [`predict`] runs elastic-net logistic and linear regressions under
//!   10-fold cross-validation.
//! - [`synth`] generates synthetic cumulative-advantage cohorts with known
//!   ground truth, used to validate every other module.
//! - [`pipeline`] orchestrates the whole run behind the `matilda` CLI.

pub mod careers;
pub mod corpus;
pub mod error;
pub mod features;
pub mod indices;
pub mod inequality;
pub mod matthew;
pub mod pipeline;
pub mod predict;
pub mod stats;
pub mod synth;

pub use error::{Error, Result};

/// Number of career ages under observation; the start year is age 1.
pub const CAREER_SPAN: usize = 15;

//! Chlorophyll-a retrieval from six-band sea-surface reflectance.
//!
//! The crate bundles, behind one deterministic fit/predict contract:
//!
//! - the OC4V4 maximum-band-ratio baseline ([`baseline`]);
//! - eight regression estimators — ordinary least squares, ridge, a CART
//!   decision tree, bagging, random forest, extremely randomized trees,
//!   RBF-kernel support vector regression and k-nearest-neighbours
//!   ([`estimators`]);
//! - evaluation tools: MAE / accuracy comparison reports, Gaussian kernel
//!   density estimation, grid compositing, relative-error maps and PPM
//!   rendering ([`evaluation`]);
//! - file formats for sample tables (CSV), geospatial grid stacks (binary)
//!   and fitted models (JSON) ([`io`]);
//! - a synthetic benchmark generator with a known, invertible forward model
//!   ([`synth`]);
//! - a subcommand CLI tying the stages into reproducible pipelines
//!   ([`cli`]).
//!
//! Everything is reproducible by construction: seeds are explicit (never
//! time-derived), parallel code merges results in input order, and repeated
//! runs with the same inputs produce byte-identical files.

pub mod baseline;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod grid;
pub mod io;
pub mod rng;
pub mod sample;
pub mod split;
pub mod synth;

pub use error::{Error, Result};
pub use estimators::{fit, EstimatorSpec, FittedModel, ModelSpec};
pub use grid::{GeoGrid, GridStack};
pub use sample::{Sample, SampleTable};

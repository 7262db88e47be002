//! Behavioral markers for collections of multi-dimensional sparse time series.
//!
//! Each entity is a set of `N` aligned real-valued series. The pipeline
//! symbolizes every component on a uniform partition of its range, estimates
//! per-component entropy from an incremental Lempel-Ziv parse, and derives
//! three markers:
//!
//! - the **leading component**, from the position of the normalized entropy
//!   vector inside the standard simplex ([`simplex`]);
//! - the **trend** of the entropy walk traced by sliding windows ([`walk`]);
//! - the **diversification**, from Zipf rank-frequency slopes of fixed-length
//!   words ([`zipf`]).
//!
//! [`markers`] assembles them into per-entity reports and collection
//! summaries. Collection-level work fans out over entities with rayon when
//! the `parallel` feature is enabled (see [`Execution`]); results do not
//! depend on the degree of parallelism.

pub mod entropy;
mod error;
mod exec;
pub mod markers;
pub mod model;
pub mod plot;
pub mod simplex;
pub mod synth;
pub mod walk;
pub mod zipf;

pub use error::{Error, Result};
pub use exec::Execution;

pub use entropy::{entropy, entropy_vector, lz_parse, EntropyVector, ParseResult};
pub use markers::{analyze_collection, analyze_entity, AnalysisConfig, CollectionSummary, MarkerReport};
pub use model::{difference, sparsity, symbolize, Alphabet, MultiSeries, Series, SparsityProfile, SymbolicSeries};
pub use simplex::{influence, influence_map, project, InfluenceVerdict, SimplexPoint};
pub use walk::{attribute, fit_trend, make_windows, moving_matrix, walk, AttributionVerdict, EntropyWalk, MovingMatrix, Trend, WindowScheme};
pub use zipf::{diversification, word_census, zipf_coefficient, Diversification, WordCensus, ZipfFit};

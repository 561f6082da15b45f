//! Text-to-route pipeline: mine pairwise closeness statements about named
//! places from a text corpus, learn how strongly each pair is associated,
//! push those associations into a road network as discounted edge costs, and
//! answer routing queries that prefer the well-described parts of town.
//!
//! The crate is organised as a chain of small modules, each consuming the
//! output of the previous one:
//!
//! * [`gazetteer`] / [`lexicon`]  reference data (place names, relation phrases)
//! * [`extract`]                  sentence splitting, entity spotting, triplet extraction
//! * [`features`]                 (distance, orientation) vectors per relation
//! * [`mixture`]                  2-D Gaussian mixtures fitted per relation
//! * [`closeness`]                Bayesian pair scores and the relationship graph
//! * [`network`]                  road graph loading and cost enrichment
//! * [`routing`]                  Dijkstra variants over plain and enriched costs
//! * [`evaluation`]               photo-based popularity and experiment sweeps
//! * [`fixture`]                  synthetic city generator for end-to-end runs
//! * [`pipeline`]                 the command layer used by the CLI binary

pub mod closeness;
pub mod error;
pub mod evaluation;
pub mod extract;
pub mod features;
pub mod fixture;
pub mod gazetteer;
pub mod geo;
pub mod lexicon;
pub mod mixture;
pub mod network;
pub mod pipeline;
pub mod routing;

pub use error::PipelineError;
pub use geo::{Coord, CoordMode};

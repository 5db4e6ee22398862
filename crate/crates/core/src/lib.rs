//! Toolkit for building context-grounded educational crossword clue datasets.
//!
//! The pipeline mines encyclopedia lead sections ([`ingest`]), screens pages
//! and keywords ([`screen`]), renders the generation prompt ([`prompt`]),
//! drives a chat-completion model and validates its output ([`generate`]),
//! and assembles the surviving rows into a corpus ([`dataset`]). Generated
//! clues are scored with ROUGE ([`metrics`]), rated by humans ([`rating`])
//! and laid out into playable grids ([`grid`]). [`pipeline`] wires the
//! stages together.
//!
//! Metric code is generic over the floating point type; the aliases below
//! fix it for the common cases.

pub mod dataset;
pub mod generate;
pub mod grid;
pub mod ingest;
pub mod metrics;
pub mod pipeline;
pub mod prompt;
pub mod rating;
pub mod screen;
pub mod text;

mod par;

pub use dataset::ClueInstructExample;
pub use generate::{ClueSet, ClueStatus, GenParams};
pub use grid::{CrosswordLayout, Direction, Placement};
pub use ingest::{Importance, PageRecord};
pub use prompt::PromptTemplate;
pub use rating::{Rating, RatingRecord, RatingStore};
pub use screen::{ScreenConfig, ScreenDecision};

/// ROUGE triple in double precision.
pub type RougeScore = metrics::RougeScore<f64>;
/// ROUGE triple in single precision.
pub type RougeScore32 = metrics::RougeScore<f32>;
/// Context-adherence report in double precision.
pub type AdherenceReport = metrics::AdherenceReport<f64>;
/// Generation evaluation triple (ROUGE-1/2/L) in double precision.
pub type GenerationScores = metrics::GenerationScores<f64>;

/// Tool version recorded in build manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

//! treespace: a finite-model toolkit for trees of hyperbolic metric spaces.
//!
//! Everything runs on finite graphs with unit edge lengths. The crate builds
//! total spaces of graph-of-graph gluings, constructs ladder subsets from a
//! geodesic in the root space, retracts the total space onto them, and turns
//! the constants that come out (projection Lipschitz bounds, vertical bounds,
//! quasiconvexity) into checkable reports. Group-theoretic model builders
//! (free groups, free-by-cyclic extensions, hyperbolic tilings) supply the
//! test spaces, plus subgroup distortion and twist-product length bounds.
//!
//! Every measured quantity is exact (integer or rational); audits report
//! measured value, budget, and verdict rather than silently passing.

pub mod boundary;
pub mod error;
pub mod graph;
pub mod groups;
pub mod hyperbolic;
pub mod ladder;
pub mod report;
pub mod tree;

pub use error::{Error, Result};

// Rational values appear in the public API (distortion ratios, ladder
// constants), so callers get the arithmetic types from here.
pub use num_rational;
pub use num_rational::Ratio;

// The book chapters double as documentation tests: every fenced Rust block in
// book/src compiles and runs under `cargo test --doc`.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/metric-graphs.md")]
    pub struct MetricGraphsChapter;
    #[doc = include_str!("../../../book/src/hyperbolic-audits.md")]
    pub struct HyperbolicAuditsChapter;
    #[doc = include_str!("../../../book/src/trees-of-spaces.md")]
    pub struct TreesOfSpacesChapter;
    #[doc = include_str!("../../../book/src/ladders.md")]
    pub struct LaddersChapter;
    #[doc = include_str!("../../../book/src/boundary-profiles.md")]
    pub struct BoundaryProfilesChapter;
    #[doc = include_str!("../../../book/src/group-models.md")]
    pub struct GroupModelsChapter;
}

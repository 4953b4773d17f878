//! Exact computation of the degree-truncated universal quantum invariant of
//! closed oriented 3-manifolds presented by Dehn surgery on a framed link.
//!
//! The pipeline: a link diagram is decomposed into elementary tangles, each
//! tangle gets its chord-diagram value built from the Drinfeld associator,
//! the stacked product gives the framed Kontsevich integral, the
//! circle-elimination maps turn solid circles into trivalent graphs, and the
//! linking-matrix normalization yields the surgery invariant and its
//! logarithm.
//!
//! All coefficients live in an exact polynomial ring over the rationals in
//! formal normalized multiple-zeta-value symbols; no floating point enters
//! the pipeline (a numeric zeta oracle exists for tests and table
//! generation only).

pub mod scalars;
pub mod diagrams;
pub mod spaces;
pub mod associator;
pub mod links;
pub mod lmo;
pub mod kontsevich;
pub mod selftest;

pub use scalars::{MzvIndex, ReductionTable, Scalar};
pub use diagrams::{Component, ComponentKind, Diagram, End};
pub use spaces::{Element, Reducer, RelationSet};
pub use links::{BraidWord, LinkDiagram, LinkingMatrix, TangleToken};

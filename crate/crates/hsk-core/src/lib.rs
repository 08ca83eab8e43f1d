//! Algebraic-topological invariants of finite undirected graphs, built for
//! the study of hom-shift mixing: walk algebra, fundamental and square
//! groups via edge presentations, coset enumeration, covers (universal and
//! square), realization of groups as square groups, and the gluing-rate
//! probe over strip graphs.

pub mod corpus;
pub mod coset;
pub mod cover;
pub mod error;
pub mod graph;
pub mod homshift;
pub mod presentation;
pub mod realization;
pub mod snf;
pub mod walk;

pub use error::{Error, Result};
pub use graph::{Graph, VertexId};

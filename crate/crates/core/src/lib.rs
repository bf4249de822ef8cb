//! Discrete nonlinear potential theory on weighted graphs.
//!
//! The crate computes p-modulus of curve families, Dirichlet p-capacity and
//! p-harmonic functions on finite edge-weighted graphs, and uses exhaustions
//! of such graphs to classify ends and spaces as p-hyperbolic or p-parabolic
//! and to decide membership in Liouville-type classes.
//!
//! Layout:
//! - [`graph`]: metric measure graphs, balls, components
//! - [`exhaustion`]: nested truncations, chains at infinity
//! - [`energy`]: p-energy, p-harmonic Dirichlet solves, capacity, extensions
//! - [`modulus`]: p-modulus by constraint generation, duality checks
//! - [`ends`]: hyperbolic/parabolic classification of ends, spaces and chains
//! - [`liouville`]: Liouville-class lattice and decision procedures
//! - [`scenarios`]: deterministic builders for the named example spaces
//! - [`io`]: file formats and report serialization

pub mod ends;
pub mod energy;
pub mod error;
pub mod exhaustion;
pub mod fit;
pub mod graph;
pub mod io;
pub mod liouville;
pub mod modulus;
pub mod par;
pub mod scenarios;

pub use error::{Error, Result};
pub use graph::{ball, complement_components, graph_distance, Edge, MetricGraph, NodeId, NodeSet};

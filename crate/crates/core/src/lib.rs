//! Periodic networks of fixed vertex degree that minimize the length
//! quotient Lⁿ/V.
//!
//! A network is stored as a [`QuotientGraph`] whose edges carry integer
//! shifts, a [`Lattice`] basis and Cartesian vertex positions. On top of that
//! data model the crate provides force and geometric-median routines
//! ([`balance`]), quotient combinatorics ([`topology`]), explicit balanced
//! constructions and a catalog of minimizers ([`construct`]), a numerical
//! minimizer ([`optimize`]) and closed-form lower bounds with equality
//! certificates ([`bounds`]).

pub mod balance;
pub mod bounds;
pub mod construct;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod intmat;
pub mod io;
pub mod lattice;
pub mod network;
pub mod obj;
pub mod optimize;
pub mod topology;

pub use error::{Error, Result};
pub use graph::{Edge, Multigraph, QuotientGraph, Skeleton};
pub use lattice::Lattice;
pub use network::{PeriodicNetwork, ValidityReport};
pub use topology::{TopologyClass, TopologyTag};

//! Percolation laboratory for non-unimodular transitive graphs.
//!
//! Graphs are generated lazily from canonical vertex addresses
//! ([`graphs`]), edge states come from a seeded hash so that every
//! percolation parameter is realized on one coupled configuration
//! ([`perc`]), and the expectations that govern critical behaviour are
//! estimated by Monte Carlo ([`estimate`]) and cross-checked against exact
//! enumeration on finite truncations ([`oracle`]). [`analytic`] holds the
//! closed-form combinatorics, and [`suite`] bundles the verification
//! checks run by the `perclab suite` command.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod estimate;
pub mod graphs;
pub mod oracle;
pub mod perc;
pub mod suite;

pub use error::{Error, Result};

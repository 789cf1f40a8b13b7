//! Word co-occurrence network (WCN) toolkit for short, user-generated texts.
//!
//! The pipeline runs corpus -> tokens -> WCN -> decomposition -> keyphrases ->
//! contextual ranking -> events:
//!
//! - [`corpus`]: load raw documents and tokenize them.
//! - [`wcn`]: build the directed, weighted co-occurrence network and query
//!   per-node / per-edge metrics.
//! - [`netsci`]: structural analysis (distributions, power-law exponent,
//!   average shortest path length, small-world check, assortativity).
//! - [`baselines`]: keyword scoring baselines (TF-IDF, HITS, TextRank,
//!   NERank, TopicRank, centralities).
//! - [`decompose`]: reduce a WCN to high-weight subgraphs (heuristic edge
//!   retention, k-bridge, threshold decomposition).
//! - [`phrase`]: turn subgraphs into ordered keyphrases (MLS paths,
//!   topological sorting, assortativity-terminated BArank).
//! - [`ahp`]: rank keyphrases by contextual importance with the analytic
//!   hierarchy process and classify them into the three slots.
//! - [`detect`]: TWCM batch extraction and the sliding-window event detector.
//! - [`eval`]: score extracted phrases against ground-truth annotations.

pub mod ahp;
pub mod baselines;
pub mod config;
pub mod corpus;
pub mod decompose;
pub mod detect;
mod error;
pub mod eval;
pub mod netsci;
pub mod phrase;
pub mod wcn;

pub use error::{Error, Result};

//! Bridge-node identification for directed message-forwarding networks.
//!
//! The crate builds a forwarding graph from collection-pipeline CSV exports,
//! computes a composite bridge score per channel (in-degree centrality,
//! eigenvector centrality, clustering coefficient, min-max normalized and
//! weighted), detects communities with Louvain, and measures how removing
//! candidate target sets disrupts density, path length, and community
//! structure. A grid search over integer weight combinations finds the
//! combination whose top-k removal disrupts density the most.

pub mod bridge;
pub mod community;
pub mod error;
pub mod generate;
pub mod gexf;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod perturb;

pub use error::{Error, Result};
pub use graph::ForwardGraph;

//! Topic modeling for legal document collections.
//!
//! The pipeline runs record ingestion ([`corpus`]), text cleanup
//! ([`preprocess`]), document-term and TF-IDF matrices ([`vectorize`]),
//! collapsed Gibbs LDA ([`lda`]) and per-year topic analytics ([`analyze`]).

pub mod analyze;
pub mod corpus;
pub mod lda;
pub mod preprocess;
pub mod trend;
pub mod vectorize;

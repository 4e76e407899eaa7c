//! Cross-lingual word embedding alignment.
//!
//! Orthogonal maps learned with Procrustes and self-learning, CSLS retrieval,
//! lexicon extraction from word-aligned bitext, morphological filtering,
//! multilingual alignment through a hub language and hub-choice analytics.

pub mod analysis;
pub mod embedio;
pub mod error;
pub mod extraction;
pub mod kvfile;
pub mod lexicon;
pub mod mapping;
pub mod morph;
pub mod multialign;
pub mod retrieval;

pub use embedio::{load_embeddings, EmbeddingSpace, NormStep};
pub use error::{Error, Result};
pub use lexicon::Lexicon;
pub use mapping::{procrustes, self_learn, OrthogonalMap, RefinementConfig, SeedStrategy};
pub use multialign::{align_to_hub, MultiSpace};
pub use retrieval::{precision_at_k, CslsScorer};

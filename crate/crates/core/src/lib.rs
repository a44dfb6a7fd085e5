//! Multiview social-media user representation learning.
//!
//! The pipeline fuses four views of a user — profile description,
//! free-text location, concatenated activity tweets, and a mention-network
//! embedding — into one dense representation and classifies user type or
//! motivation. The crate covers corpus handling, graph construction and
//! node embeddings, the view encoders, the fusion classifier, training,
//! evaluation, a built-in experiment suite, and the corpus analytics
//! behind hashtag/term/location breakdowns.

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod graph;
pub mod encoding;
pub mod model;
pub mod experiments;
pub mod nn;
pub mod synthetic;
pub mod train;

pub use error::{Error, Result};

// the types most callers touch, re-exported from the crate root
pub use corpus::{Corpus, SplitAssignment, Task, UserRecord};
pub use encoding::{TokenEncoder, View, ViewRepresentation};
pub use eval::EvalReport;
pub use experiments::{ExperimentConfig, SuiteResult};
pub use graph::{MentionGraph, NetworkEmbeddingTable, WalkConfig};
pub use model::{Checkpoint, JointModel, JointModelConfig};
pub use train::{OptimizerConfig, TrainingTrace};

//! Bottom-up rule learning over knowledge graphs: path sampling,
//! generalisation into abstract rules, collective specialisation and
//! scoring of instantiated rules, overfitting analysis and completion.

pub mod bench;
pub mod error;
pub mod evaluate;
pub mod generalize;
pub mod ground;
pub mod kgc;
pub mod rule;
pub mod specialize;
pub mod store;

pub use error::{LearnError, RuleError, StoreError};
pub use generalize::{generalize, GenConfig, FrequencyMap, StopReason};
pub use ground::{ground, ground_instantiated, GroundingIndex, GroundingSet};
pub use rule::{BodyAtom, Rule, RuleKind, Slot};
pub use specialize::{learn_target, LearnConfig, Measure, RuleStats, ScoreConfig, ScoredRule};
pub use store::{Direction, EntityId, KnowledgeGraph, PredicateId, SplitSet, Triple, TripleSet, Vocab};

//! Community detection for location-tagged networks.
//!
//! Detects communities by greedy agglomerative modularity maximization where
//! edges can be weighted by geographic proximity (`exp(-distance/sigma)`)
//! and by normalized common-neighbor similarity. Ships with a locality
//! diagnostic that tells whether a network is a good fit for location-aware
//! detection, a planted-partition benchmark generator with distance-
//! modulated edge probabilities, and partition scoring utilities.
//!
//! See the `examples/` directory for a runnable tour: generation, locality
//! analysis, detection, evaluation, and scaling benchmarks.

pub mod engine;
pub mod error;
pub mod graph;
pub mod locality;
pub mod metrics;
pub mod modularity;
pub mod synth;

pub mod commands;
pub mod io;

pub use engine::{detect, DeltaQLedger, Dendrogram, EngineOptions, MergeOutcome, MergeRecord};
pub use error::{Error, Result};
pub use graph::{load_network, GeoPoint, LoadStats, Metric, Network};
pub use locality::{locality_report, mean_pair_distance, EmpiricalCdf, LocalityReport};
pub use metrics::{
    accuracy, geographic_span, random_partition, size_profile, CommunityScore, SizeBucket,
};
pub use modularity::{Partition, Variant, WeightContext};
pub use synth::{calibrate_alpha, generate, SynthConfig, SynthNetwork};

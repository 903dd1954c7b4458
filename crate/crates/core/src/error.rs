use std::path::PathBuf;

use thiserror::Error;

use crate::modularity::Variant;

/// Errors produced by loading, analysis, detection, and generation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("node {id:?} appears in the edge file but has no location")]
    MissingLocation { id: String },

    #[error("{path}:{line}: duplicate location row for node {id:?}")]
    DuplicateLocation {
        path: PathBuf,
        line: usize,
        id: String,
    },

    #[error("{path}:{line}: coordinate ({x}, {y}) out of range for geodesic input (need -180<=x<=180, -90<=y<=90)")]
    CoordinateOutOfRange {
        path: PathBuf,
        line: usize,
        x: f64,
        y: f64,
    },

    #[error("{path}:{line}: coordinate ({x}, {y}) is not finite")]
    NonFiniteCoordinate {
        path: PathBuf,
        line: usize,
        x: f64,
        y: f64,
    },

    #[error("network has no edges")]
    EmptyEdgeSet,

    #[error("operation needs at least {needed} nodes, network has {have}")]
    TooFewNodes { needed: usize, have: usize },

    #[error("mean pair distance must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("node {0} has degree zero; edge weights are only defined on edge endpoints")]
    ZeroDegreeEndpoint(u32),

    #[error(
        "weight context was built for the {built} variant but a {wanted} evaluation was requested"
    )]
    VariantMismatch { built: Variant, wanted: Variant },

    #[error(
        "similarity-weighted edge mass is zero: no edge closes a triangle, so the similarity \
         functional is undefined on this network; run the locality variant instead"
    )]
    ZeroSimilarityMass,

    #[error("communities {0} and {1} share an edge; read the stored gain entry instead of the cross penalty")]
    AdjacentCommunities(u32, u32),

    #[error(
        "target average degree {target} is unreachable: with every edge probability capped at 1 \
         the expected average degree is at most {reachable:.3}"
    )]
    UnreachableDegree { target: f64, reachable: f64 },

    #[error("label list covers {labels} nodes but the network has {nodes}")]
    LengthMismatch { labels: usize, nodes: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code: 2 for input problems, 3 for configurations that cannot
    /// be satisfied, 1 for anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. }
            | Error::MissingLocation { .. }
            | Error::DuplicateLocation { .. }
            | Error::CoordinateOutOfRange { .. }
            | Error::NonFiniteCoordinate { .. }
            | Error::EmptyEdgeSet
            | Error::TooFewNodes { .. }
            | Error::LengthMismatch { .. }
            | Error::Io(_) => 2,
            Error::ZeroSimilarityMass
            | Error::UnreachableDegree { .. }
            | Error::InvalidConfig(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

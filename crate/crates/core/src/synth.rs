//! Planted-partition benchmark networks on a grid.
//!
//! Nodes sit at integer grid coordinates (1 km spacing, planar metric) and
//! carry uniformly random community labels. Each unordered pair gets an
//! independent edge with probability `alpha * p_c * exp(-dis/omega)`, where
//! `p_c` depends on whether the labels match and `alpha` is calibrated so
//! the expected average degree hits a target.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{GeoPoint, Metric, Network};

/// Generator settings. `omega` may be `f64::INFINITY` to remove geographic
/// influence entirely.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub grid_side: u32,
    pub node_count: u32,
    pub label_count: u32,
    pub omega: f64,
    pub p_same: f64,
    pub p_diff: f64,
    pub target_avg_degree: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            grid_side: 50,
            node_count: 2500,
            label_count: 10,
            omega: 3.0,
            p_same: 0.5,
            p_diff: 0.1,
            target_avg_degree: 15.0,
            seed: 1,
        }
    }
}

impl SynthConfig {
    /// Derive `node_count` from the grid side (one node per cell).
    pub fn with_grid_side(side: u32) -> SynthConfig {
        SynthConfig {
            grid_side: side,
            node_count: side * side,
            ..SynthConfig::default()
        }
    }

    /// Smallest full grid holding `n` nodes; cells fill row-major.
    pub fn with_node_count(n: u32) -> SynthConfig {
        let side = (n as f64).sqrt().ceil() as u32;
        SynthConfig {
            grid_side: side,
            node_count: n,
            ..SynthConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::InvalidConfig("need at least 2 nodes".into()));
        }
        if self.node_count > self.grid_side.saturating_mul(self.grid_side) {
            return Err(Error::InvalidConfig(format!(
                "{} nodes do not fit on a {side}x{side} grid",
                self.node_count,
                side = self.grid_side
            )));
        }
        if self.label_count == 0 {
            return Err(Error::InvalidConfig("label_count must be positive".into()));
        }
        if !(self.p_diff > 0.0 && self.p_diff < self.p_same && self.p_same <= 1.0) {
            return Err(Error::InvalidConfig(
                "probabilities must satisfy 0 < p_diff < p_same <= 1".into(),
            ));
        }
        if self.omega.is_nan() || self.omega <= 0.0 {
            return Err(Error::InvalidConfig(
                "omega must be positive (or infinite)".into(),
            ));
        }
        if self.target_avg_degree < 0.0 || !self.target_avg_degree.is_finite() {
            return Err(Error::InvalidConfig(
                "target average degree must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }

    /// Grid coordinate of node `i` (row-major lattice fill).
    pub fn cell_point(&self, i: u32) -> GeoPoint {
        GeoPoint::new((i % self.grid_side) as f64, (i / self.grid_side) as f64)
    }
}

/// A generated network plus its planted labels.
#[derive(Debug, Clone)]
pub struct SynthNetwork {
    pub network: Network,
    pub true_labels: Vec<u32>,
}

/// Uniform label per node from the seeded generator (stream 0).
pub fn assign_labels(cfg: &SynthConfig) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0);
    (0..cfg.node_count)
        .map(|_| rng.random_range(0..cfg.label_count))
        .collect()
}

/// Scale factor `alpha` such that the expected average degree matches the
/// target, found by bisection over `[0, alpha_max]` where `alpha_max` keeps
/// every pair probability at or below 1. Labels must already be assigned:
/// the expected degree depends on the joint label/distance layout.
pub fn calibrate_alpha(cfg: &SynthConfig, labels: &[u32]) -> Result<f64> {
    cfg.validate()?;
    if labels.len() != cfg.node_count as usize {
        return Err(Error::LengthMismatch {
            labels: labels.len(),
            nodes: cfg.node_count as usize,
        });
    }
    if cfg.target_avg_degree == 0.0 {
        return Ok(0.0);
    }
    let n = cfg.node_count;
    // One pass over all pairs: the expected degree is linear in alpha, so
    // the sum and the cap are all bisection needs.
    let mut base_sum = 0.0f64;
    let mut base_max = 0.0f64;
    for v in 0..n {
        let pv = cfg.cell_point(v);
        for w in (v + 1)..n {
            let p_c = if labels[v as usize] == labels[w as usize] {
                cfg.p_same
            } else {
                cfg.p_diff
            };
            let d = crate::graph::point_distance(pv, cfg.cell_point(w), Metric::PlanarEuclidean);
            let p = p_c * (-d / cfg.omega).exp();
            base_sum += p;
            if p > base_max {
                base_max = p;
            }
        }
    }
    if base_max == 0.0 {
        return Err(Error::UnreachableDegree {
            target: cfg.target_avg_degree,
            reachable: 0.0,
        });
    }
    let alpha_max = 1.0 / base_max;
    let expected_degree = |alpha: f64| 2.0 * alpha * base_sum / n as f64;
    if expected_degree(alpha_max) < cfg.target_avg_degree - 0.1 {
        return Err(Error::UnreachableDegree {
            target: cfg.target_avg_degree,
            reachable: expected_degree(alpha_max),
        });
    }
    let (mut lo, mut hi) = (0.0f64, alpha_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected_degree(mid) < cfg.target_avg_degree {
            lo = mid;
        } else {
            hi = mid;
        }
        if (expected_degree(mid) - cfg.target_avg_degree).abs() < 1e-9 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Generate a planted-partition network. Deterministic in the seed: labels
/// and edges come from separate streams of the same generator.
pub fn generate(cfg: &SynthConfig) -> Result<SynthNetwork> {
    cfg.validate()?;
    let labels = assign_labels(cfg);
    let alpha = calibrate_alpha(cfg, &labels)?;
    let n = cfg.node_count;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut edges: Vec<(u32, u32)> = Vec::new();
    for v in 0..n {
        let pv = cfg.cell_point(v);
        let lv = labels[v as usize];
        for w in (v + 1)..n {
            let p_c = if lv == labels[w as usize] {
                cfg.p_same
            } else {
                cfg.p_diff
            };
            let d = crate::graph::point_distance(pv, cfg.cell_point(w), Metric::PlanarEuclidean);
            let p = alpha * p_c * (-d / cfg.omega).exp();
            if rng.random::<f64>() < p {
                edges.push((v, w));
            }
        }
    }
    let points: Vec<GeoPoint> = (0..n).map(|i| cfg.cell_point(i)).collect();
    let network = Network::from_indexed(points, edges, Metric::PlanarEuclidean)?;
    Ok(SynthNetwork {
        network,
        true_labels: labels,
    })
}

/// Random points in a unit box with independent Bernoulli edges; handy for
/// oracle checks and benchmarks.
pub fn random_geometric(n: usize, edge_prob: f64, seed: u64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<GeoPoint> = (0..n)
        .map(|_| GeoPoint::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if rng.random::<f64>() < edge_prob {
                edges.push((u, v));
            }
        }
    }
    Network::from_indexed(points, edges, Metric::PlanarEuclidean).expect("clean construction")
}

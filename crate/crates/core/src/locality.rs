//! Locality diagnostics: how strongly geography shapes the edge set.
//!
//! Compares the distance distribution of connected pairs against the
//! distance distribution of arbitrary pairs. A network where edges
//! concentrate at short range shows a large gap between the two CDFs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Network;

/// Networks whose TVD exceeds this are considered suitable for
/// location-aware detection.
pub const SUITABILITY_THRESHOLD: f64 = 0.25;

/// Default cap on the number of node pairs sampled for the all-pairs CDF
/// and the mean pair distance.
pub const DEFAULT_PAIR_SAMPLE: usize = 2_000_000;

/// Breakpoints generated per distance source when building the shared grid.
const GRID_POINTS_PER_SOURCE: usize = 512;

/// An empirical cumulative distribution sampled on a fixed grid of distance
/// breakpoints. `values[i]` is the fraction of samples `<= grid[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub sample_count: usize,
}

impl EmpiricalCdf {
    /// Evaluate the CDF of `samples` on `grid`. The grid must be non-empty
    /// and strictly increasing.
    pub fn from_samples(mut samples: Vec<f64>, grid: &[f64]) -> Result<Self> {
        validate_grid(grid)?;
        if samples.is_empty() {
            return Err(Error::InvalidConfig("empty sample set".into()));
        }
        samples.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let n = samples.len() as f64;
        let values = grid
            .iter()
            .map(|&g| samples.partition_point(|&x| x <= g) as f64 / n)
            .collect();
        Ok(EmpiricalCdf {
            grid: grid.to_vec(),
            values,
            sample_count: samples.len(),
        })
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty distance grid".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "distance grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Locality summary of a network.
#[derive(Debug, Clone)]
pub struct LocalityReport {
    /// Maximum of `F_connected - F_all` over the shared grid. May be
    /// negative on anti-local networks.
    pub tvd: f64,
    /// Smallest grid distance where that maximum is attained.
    pub inflection_km: f64,
    /// Mean distance over the sampled node pairs.
    pub sigma_km: f64,
    pub f_all: EmpiricalCdf,
    pub f_connected: EmpiricalCdf,
    pub suitable: bool,
    pub pair_sample_size: usize,
    pub rng_seed: u64,
}

/// Distances of all unordered node pairs when there are at most
/// `sample_size` of them, otherwise `sample_size` pairs drawn uniformly with
/// the seeded generator. The boolean reports whether the set is exhaustive.
fn pair_distance_sample(net: &Network, sample_size: usize, seed: u64) -> Result<(Vec<f64>, bool)> {
    let n = net.node_count();
    if n < 2 {
        return Err(Error::TooFewNodes { needed: 2, have: n });
    }
    let total = n * (n - 1) / 2;
    if total <= sample_size {
        let mut out = Vec::with_capacity(total);
        for v in 0..n as u32 {
            for w in (v + 1)..n as u32 {
                out.push(net.distance(v, w));
            }
        }
        return Ok((out, true));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(sample_size);
    while out.len() < sample_size {
        let v = rng.random_range(0..n as u32);
        let w = rng.random_range(0..n as u32);
        if v != w {
            out.push(net.distance(v, w));
        }
    }
    Ok((out, false))
}

fn edge_distances(net: &Network) -> Result<Vec<f64>> {
    if net.edge_count() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    Ok(net
        .edges()
        .iter()
        .map(|&(u, v)| net.distance(u, v))
        .collect())
}

/// Empirical CDF of the distance between node pairs, sampled if the pair
/// count exceeds `sample_size`.
pub fn all_pairs_cdf(
    net: &Network,
    sample_size: usize,
    seed: u64,
    grid: &[f64],
) -> Result<EmpiricalCdf> {
    if sample_size == 0 {
        return Err(Error::InvalidConfig(
            "sample_size must be at least 1".into(),
        ));
    }
    let (samples, _) = pair_distance_sample(net, sample_size, seed)?;
    EmpiricalCdf::from_samples(samples, grid)
}

/// Exact empirical CDF of the distance between connected node pairs.
pub fn connected_pairs_cdf(net: &Network, grid: &[f64]) -> Result<EmpiricalCdf> {
    EmpiricalCdf::from_samples(edge_distances(net)?, grid)
}

/// Mean geographic distance over node pairs: exact when all pairs fit in
/// `sample_size`, otherwise a seeded uniform sample mean.
pub fn mean_pair_distance(net: &Network, sample_size: usize, seed: u64) -> Result<f64> {
    let (samples, _) = pair_distance_sample(net, sample_size.max(1), seed)?;
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Log-spaced breakpoints from the 0.1th percentile to the maximum of the
/// sample, clamped to positive values.
fn log_grid(samples: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let hi = *sorted.last().unwrap();
    let rank = ((0.001 * sorted.len() as f64).ceil() as usize).max(1) - 1;
    let mut lo = sorted[rank];
    if lo <= 0.0 {
        match sorted.iter().find(|&&d| d > 0.0) {
            Some(&d) => lo = d,
            None => return vec![0.0],
        }
    }
    if hi <= lo {
        return vec![hi];
    }
    let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
    let steps = GRID_POINTS_PER_SOURCE - 1;
    let mut grid: Vec<f64> = (0..=steps)
        .map(|i| (ln_lo + (ln_hi - ln_lo) * i as f64 / steps as f64).exp())
        .collect();
    // Pin the endpoints so the last breakpoint covers the largest sample.
    grid[0] = lo;
    grid[steps] = hi;
    grid.dedup();
    grid
}

fn shared_grid(edge_d: &[f64], pair_d: &[f64]) -> Vec<f64> {
    let mut grid = log_grid(edge_d);
    grid.extend(log_grid(pair_d));
    grid.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    grid
}

/// Full locality diagnostic: shared grid, both CDFs, TVD, inflection
/// distance, mean pair distance, and the suitability verdict.
pub fn locality_report(net: &Network, sample_size: usize, seed: u64) -> Result<LocalityReport> {
    if sample_size == 0 {
        return Err(Error::InvalidConfig(
            "sample_size must be at least 1".into(),
        ));
    }
    let edge_d = edge_distances(net)?;
    let (pair_d, _exhaustive) = pair_distance_sample(net, sample_size, seed)?;
    let grid = shared_grid(&edge_d, &pair_d);
    let sigma_km = pair_d.iter().sum::<f64>() / pair_d.len() as f64;
    let pair_sample_size = pair_d.len();
    let f_connected = EmpiricalCdf::from_samples(edge_d, &grid)?;
    let f_all = EmpiricalCdf::from_samples(pair_d, &grid)?;

    let mut tvd = f64::NEG_INFINITY;
    let mut inflection_km = grid[0];
    for ((&g, &fc), &fa) in grid.iter().zip(&f_connected.values).zip(&f_all.values) {
        let gap = fc - fa;
        if gap > tvd {
            tvd = gap;
            inflection_km = g;
        }
    }
    Ok(LocalityReport {
        tvd,
        inflection_km,
        sigma_km,
        f_all,
        f_connected,
        suitable: tvd > SUITABILITY_THRESHOLD,
        pair_sample_size,
        rng_seed: seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GeoPoint, Metric, Network};

    fn planar(points: &[(f64, f64)], edges: &[(u32, u32)]) -> Network {
        let pts = points.iter().map(|&(x, y)| GeoPoint::new(x, y)).collect();
        Network::from_indexed(pts, edges.to_vec(), Metric::PlanarEuclidean).unwrap()
    }

    #[test]
    fn single_pair_cdf() {
        let net = planar(&[(0.0, 0.0), (10.0, 0.0)], &[(0, 1)]);
        let cdf = all_pairs_cdf(&net, 100, 1, &[5.0, 10.0, 20.0]).unwrap();
        assert_eq!(cdf.values, vec![0.0, 1.0, 1.0]);
        assert_eq!(cdf.sample_count, 1);
    }

    #[test]
    fn collinear_three_nodes_cdf() {
        let net = planar(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], &[(0, 1)]);
        let cdf = all_pairs_cdf(&net, 100, 1, &[1.0, 2.0]).unwrap();
        assert_eq!(cdf.values, vec![2.0 / 3.0, 1.0]);
    }

    #[test]
    fn sampling_with_room_equals_enumeration() {
        let net = planar(
            &[(0.0, 0.0), (1.0, 0.0), (5.0, 3.0), (2.0, 8.0)],
            &[(0, 1), (1, 2)],
        );
        let grid = [0.5, 2.0, 4.0, 8.0, 16.0];
        let exact = all_pairs_cdf(&net, 6, 7, &grid).unwrap();
        let sampled = all_pairs_cdf(&net, 1_000, 99, &grid).unwrap();
        assert_eq!(exact, sampled);
    }

    #[test]
    fn edge_cdf_of_345_triangle() {
        let net = planar(
            &[(0.0, 0.0), (3.0, 0.0), (3.0, 4.0)],
            &[(0, 1), (1, 2), (0, 2)],
        );
        let cdf = connected_pairs_cdf(&net, &[3.0, 4.0, 5.0]).unwrap();
        assert_eq!(cdf.values, vec![1.0 / 3.0, 2.0 / 3.0, 1.0]);
    }

    #[test]
    fn degenerate_edge_lengths_saturate() {
        let net = planar(&[(0.0, 0.0), (2.0, 0.0), (4.0, 0.0)], &[(0, 1), (1, 2)]);
        let cdf = connected_pairs_cdf(&net, &[2.0, 9.0]).unwrap();
        assert_eq!(cdf.values, vec![1.0, 1.0]);
    }

    #[test]
    fn star_edge_cdf() {
        let net = planar(
            &[(0.0, 0.0), (1.0, 0.0), (0.0, 2.0), (-3.0, 0.0), (0.0, -4.0)],
            &[(0, 1), (0, 2), (0, 3), (0, 4)],
        );
        let cdf = connected_pairs_cdf(&net, &[2.0, 4.0]).unwrap();
        assert_eq!(cdf.values, vec![0.5, 1.0]);
    }

    #[test]
    fn mean_pair_distance_small_cases() {
        let two = planar(&[(0.0, 0.0), (10.0, 0.0)], &[(0, 1)]);
        assert_eq!(mean_pair_distance(&two, 100, 1).unwrap(), 10.0);

        let three = planar(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], &[(0, 1)]);
        let mean = mean_pair_distance(&three, 100, 1).unwrap();
        assert!((mean - 4.0 / 3.0).abs() < 1e-12);

        let coincident = planar(&[(2.0, 2.0), (2.0, 2.0), (2.0, 2.0)], &[(0, 1)]);
        assert_eq!(mean_pair_distance(&coincident, 100, 1).unwrap(), 0.0);
    }

    #[test]
    fn too_few_nodes_errors() {
        let one = planar(&[(0.0, 0.0)], &[]);
        assert!(mean_pair_distance(&one, 10, 1).is_err());
    }

    #[test]
    fn empty_edge_set_errors() {
        let net = planar(&[(0.0, 0.0), (1.0, 1.0)], &[]);
        assert!(connected_pairs_cdf(&net, &[1.0]).is_err());
        assert!(locality_report(&net, 10, 1).is_err());
    }

    fn random_points(n: usize, seed: u64, scale: f64) -> Vec<(f64, f64)> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (rng.random::<f64>() * scale, rng.random::<f64>() * scale))
            .collect()
    }

    fn er_edges(n: u32, p: f64, seed: u64) -> Vec<(u32, u32)> {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        edges
    }

    #[test]
    fn location_blind_edges_have_near_zero_tvd() {
        let pts = random_points(300, 11, 100.0);
        let net = planar(&pts, &er_edges(300, 0.1, 12));
        let report = locality_report(&net, DEFAULT_PAIR_SAMPLE, 5).unwrap();
        assert!(report.tvd.abs() < 0.05, "tvd = {}", report.tvd);
        assert!(!report.suitable);
    }

    #[test]
    fn nearest_pairs_network_has_strong_locality() {
        let pts = random_points(200, 3, 100.0);
        let pts_net: Vec<GeoPoint> = pts.iter().map(|&(x, y)| GeoPoint::new(x, y)).collect();
        let mut pairs: Vec<(u32, u32, f64)> = Vec::new();
        for u in 0..200u32 {
            for v in (u + 1)..200 {
                let d = crate::graph::point_distance(
                    pts_net[u as usize],
                    pts_net[v as usize],
                    Metric::PlanarEuclidean,
                );
                pairs.push((u, v, d));
            }
        }
        pairs.sort_by(|a, b| a.2.partial_cmp(&b.2).unwrap());
        let keep = pairs.len() / 20;
        let edges: Vec<(u32, u32)> = pairs[..keep].iter().map(|&(u, v, _)| (u, v)).collect();
        let net = planar(&pts, &edges);
        let report = locality_report(&net, DEFAULT_PAIR_SAMPLE, 5).unwrap();

        // Anti-local counterpart: connecting only the farthest pairs makes
        // the gap negative everywhere except the shared grid endpoint,
        // where both CDFs reach 1, so the reported maximum sits at zero.
        let anti_edges: Vec<(u32, u32)> = pairs[pairs.len() - keep..]
            .iter()
            .map(|&(u, v, _)| (u, v))
            .collect();
        let anti = planar(&pts, &anti_edges);
        let anti_report = locality_report(&anti, DEFAULT_PAIR_SAMPLE, 5).unwrap();
        assert!(
            anti_report.tvd <= 0.0,
            "anti-local tvd = {}",
            anti_report.tvd
        );
        assert!(!anti_report.suitable);
        assert!(report.tvd > 0.5, "tvd = {}", report.tvd);
        assert!(report.suitable);
        assert!(report.sigma_km > 0.0);
    }

    #[test]
    fn report_is_deterministic_for_fixed_seed() {
        let pts = random_points(150, 21, 50.0);
        let net = planar(&pts, &er_edges(150, 0.08, 22));
        let a = locality_report(&net, 500, 77).unwrap();
        let b = locality_report(&net, 500, 77).unwrap();
        assert_eq!(a.tvd, b.tvd);
        assert_eq!(a.inflection_km, b.inflection_km);
        assert_eq!(a.sigma_km, b.sigma_km);
        assert_eq!(a.f_all, b.f_all);
    }

    #[test]
    fn two_seeds_agree_within_tolerance_on_1000_nodes() {
        let pts = random_points(1000, 31, 100.0);
        let edges: Vec<(u32, u32)> = {
            // Local edges: connect each node to a handful of near-in-index
            // nodes so the network has real locality structure.
            let mut rng = ChaCha8Rng::seed_from_u64(32);
            let mut out = Vec::new();
            for u in 0..1000u32 {
                for _ in 0..5 {
                    let v = rng.random_range(0..1000u32);
                    if v != u {
                        out.push((u.min(v), u.max(v)));
                    }
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        };
        let net = planar(&pts, &edges);
        // Force sampling by capping well below the 499,500 total pairs.
        let a = locality_report(&net, 20_000, 1).unwrap();
        let b = locality_report(&net, 20_000, 2).unwrap();
        assert!((a.tvd - b.tvd).abs() < 0.05, "{} vs {}", a.tvd, b.tvd);
    }

    #[test]
    fn permuting_ids_leaves_tvd_unchanged() {
        let pts = random_points(60, 41, 30.0);
        let edges = er_edges(60, 0.2, 42);
        let net = planar(&pts, &edges);
        let base = locality_report(&net, DEFAULT_PAIR_SAMPLE, 9).unwrap();

        // Rename nodes so lexicographic indexing reverses, then reload.
        let nodes: Vec<(String, GeoPoint)> = (0..60)
            .map(|i| (format!("z{:02}", 59 - i), GeoPoint::new(pts[i].0, pts[i].1)))
            .collect();
        let named_edges: Vec<(String, String)> = edges
            .iter()
            .map(|&(u, v)| {
                (
                    format!("z{:02}", 59 - u as usize),
                    format!("z{:02}", 59 - v as usize),
                )
            })
            .collect();
        let permuted = Network::from_named(nodes, &named_edges, Metric::PlanarEuclidean).unwrap();
        let report = locality_report(&permuted, DEFAULT_PAIR_SAMPLE, 9).unwrap();
        assert_eq!(base.tvd, report.tvd);
        assert_eq!(base.inflection_km, report.inflection_km);
    }

    #[test]
    fn inflection_is_a_grid_member() {
        let pts = random_points(80, 51, 40.0);
        let net = planar(&pts, &er_edges(80, 0.15, 52));
        let report = locality_report(&net, DEFAULT_PAIR_SAMPLE, 3).unwrap();
        assert!(report.f_all.grid.contains(&report.inflection_km));
    }
}

//! Partition scoring: geographic span, internal degree, matching-based
//! accuracy against planted labels, and per-size aggregation.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{point_distance, GeoPoint, Metric, Network};
use crate::modularity::Partition;

/// Per-community summary row.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CommunityScore {
    pub community: u32,
    pub size: usize,
    pub span_km: f64,
    pub avg_internal_degree: f64,
    #[serde(skip)]
    pub centroid: GeoPoint,
}

/// Mean-coordinate centroid of a member list. In geodesic mode longitudes
/// are recentered around their mean first so communities straddling the
/// antimeridian average sanely.
pub fn community_centroid(net: &Network, members: &[u32]) -> Result<GeoPoint> {
    if members.is_empty() {
        return Err(Error::InvalidConfig("empty community".into()));
    }
    let k = members.len() as f64;
    match net.metric() {
        Metric::PlanarEuclidean => {
            let (mut sx, mut sy) = (0.0, 0.0);
            for &v in members {
                let p = net.point(v);
                sx += p.x;
                sy += p.y;
            }
            Ok(GeoPoint::new(sx / k, sy / k))
        }
        Metric::Geodesic => {
            // Longitudes are averaged in a frame anchored on the first
            // member so a community straddling the antimeridian does not
            // average to the far side of the planet.
            let anchor = net.point(members[0]).x;
            let (mut sx, mut sy) = (0.0, 0.0);
            for &v in members {
                let p = net.point(v);
                let mut lon = p.x;
                while lon - anchor > 180.0 {
                    lon -= 360.0;
                }
                while lon - anchor < -180.0 {
                    lon += 360.0;
                }
                sx += lon;
                sy += p.y;
            }
            let mut lon = sx / k;
            if lon > 180.0 {
                lon -= 360.0;
            } else if lon < -180.0 {
                lon += 360.0;
            }
            Ok(GeoPoint::new(lon, sy / k))
        }
    }
}

/// Mean member distance to the community centroid, in kilometers.
pub fn geographic_span(net: &Network, members: &[u32]) -> Result<f64> {
    let centroid = community_centroid(net, members)?;
    let total: f64 = members
        .iter()
        .map(|&v| point_distance(net.point(v), centroid, net.metric()))
        .sum();
    Ok(total / members.len() as f64)
}

fn internal_adjacency_count(net: &Network, p: &Partition, c: u32) -> usize {
    p.members(c)
        .iter()
        .map(|&v| {
            net.neighbors(v)
                .iter()
                .filter(|&&w| p.label(w) == c)
                .count()
        })
        .sum()
}

/// Mean number of same-community neighbors over the community's members.
pub fn average_internal_degree(net: &Network, p: &Partition, c: u32) -> Result<f64> {
    if c as usize >= p.community_count() {
        return Err(Error::InvalidConfig(format!("no community {c}")));
    }
    let size = p.members(c).len();
    Ok(internal_adjacency_count(net, p, c) as f64 / size as f64)
}

/// Score every community of a partition.
pub fn score_partition(net: &Network, p: &Partition) -> Result<Vec<CommunityScore>> {
    if p.node_count() != net.node_count() {
        return Err(Error::LengthMismatch {
            labels: p.node_count(),
            nodes: net.node_count(),
        });
    }
    (0..p.community_count() as u32)
        .map(|c| {
            let members = p.members(c);
            Ok(CommunityScore {
                community: c,
                size: members.len(),
                span_km: geographic_span(net, members)?,
                avg_internal_degree: average_internal_degree(net, p, c)?,
                centroid: community_centroid(net, members)?,
            })
        })
        .collect()
}

/// Detection accuracy in percent: contingency counts between detected
/// communities and true labels, a maximum-weight one-to-one matching of
/// communities to labels, and the matched node share. Unmatched communities
/// contribute nothing.
pub fn accuracy(p: &Partition, truth: &[u32]) -> Result<f64> {
    let n = p.node_count();
    if truth.len() != n {
        return Err(Error::LengthMismatch {
            labels: truth.len(),
            nodes: n,
        });
    }
    if n == 0 {
        return Err(Error::TooFewNodes { needed: 1, have: 0 });
    }
    let truth = Partition::from_labels(truth);
    let rows = p.community_count();
    let cols = truth.community_count();
    let mut counts = vec![vec![0i64; cols]; rows];
    for v in 0..n {
        counts[p.label(v as u32) as usize][truth.label(v as u32) as usize] += 1;
    }
    let matched = max_weight_matching(&counts);
    Ok(100.0 * matched as f64 / n as f64)
}

/// Maximum-weight one-to-one matching on a non-negative rectangular weight
/// matrix; returns the total matched weight.
fn max_weight_matching(weights: &[Vec<i64>]) -> i64 {
    if weights.is_empty() || weights[0].is_empty() {
        return 0;
    }
    // Work with the smaller side as rows; weights are symmetric to
    // transposition.
    let (rows, cols) = (weights.len(), weights[0].len());
    if rows > cols {
        let transposed: Vec<Vec<i64>> = (0..cols)
            .map(|j| (0..rows).map(|i| weights[i][j]).collect())
            .collect();
        return max_weight_matching(&transposed);
    }
    // Hungarian algorithm with potentials on cost = -weight, 1-indexed.
    let (n, m) = (rows, cols);
    const INF: i64 = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; m + 1];
    let mut matched_row = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = -weights[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0;
    for j in 1..=m {
        if matched_row[j] != 0 {
            total += weights[matched_row[j] - 1][j - 1];
        }
    }
    total
}

/// Uniform independent community labels from the seeded generator.
pub fn random_partition(net: &Network, community_count: u32, seed: u64) -> Partition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<u32> = (0..net.node_count())
        .map(|_| rng.random_range(0..community_count.max(1)))
        .collect();
    Partition::from_labels(&labels)
}

/// Mean span and internal degree of communities grouped by exact size.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SizeBucket {
    pub size: usize,
    pub communities: usize,
    pub mean_span_km: f64,
    pub mean_internal_degree: f64,
}

/// Group community scores by exact size, ascending.
pub fn size_profile(net: &Network, p: &Partition) -> Result<Vec<SizeBucket>> {
    let scores = score_partition(net, p)?;
    let mut by_size: std::collections::BTreeMap<usize, (usize, f64, f64)> =
        std::collections::BTreeMap::new();
    for s in &scores {
        let slot = by_size.entry(s.size).or_insert((0, 0.0, 0.0));
        slot.0 += 1;
        slot.1 += s.span_km;
        slot.2 += s.avg_internal_degree;
    }
    Ok(by_size
        .into_iter()
        .map(|(size, (count, span, deg))| SizeBucket {
            size,
            communities: count,
            mean_span_km: span / count as f64,
            mean_internal_degree: deg / count as f64,
        })
        .collect())
}

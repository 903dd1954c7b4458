//! Edge weight functions and from-scratch quality evaluators.
//!
//! Three quality functionals share one shape: an edge-gain term summed over
//! ordered pairs minus a degree null model, divided by the total edge weight.
//! The `baseline` variant is plain modularity; `locality` weights each edge
//! by `exp(-distance/sigma)`; `similarity` additionally weights edges by the
//! normalized common-neighbor count. These evaluators recompute everything
//! from the definition and double as the slow reference the incremental
//! engine is checked against.

use crate::error::{Error, Result};
use crate::graph::Network;

/// Which quality functional is being optimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Baseline,
    Locality,
    Similarity,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::Locality => "locality",
            Variant::Similarity => "similarity",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "baseline" => Ok(Variant::Baseline),
            "locality" => Ok(Variant::Locality),
            "similarity" => Ok(Variant::Similarity),
            other => Err(Error::InvalidConfig(format!("unknown variant {other:?}"))),
        }
    }
}

/// Assignment of every node to a community, with per-community member lists.
/// Community ids are dense `0..community_count` in ascending order of the
/// labels they were built from.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    labels: Vec<u32>,
    communities: Vec<Vec<u32>>,
}

impl Partition {
    /// Build from arbitrary labels, compacting them to dense ids.
    pub fn from_labels(raw: &[u32]) -> Partition {
        let mut distinct: Vec<u32> = raw.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let remap: std::collections::HashMap<u32, u32> = distinct
            .iter()
            .enumerate()
            .map(|(i, &l)| (l, i as u32))
            .collect();
        let labels: Vec<u32> = raw.iter().map(|l| remap[l]).collect();
        let mut communities = vec![Vec::new(); distinct.len()];
        for (v, &c) in labels.iter().enumerate() {
            communities[c as usize].push(v as u32);
        }
        Partition {
            labels,
            communities,
        }
    }

    pub fn singletons(n: usize) -> Partition {
        Partition {
            labels: (0..n as u32).collect(),
            communities: (0..n as u32).map(|v| vec![v]).collect(),
        }
    }

    pub fn single(n: usize) -> Partition {
        Partition {
            labels: vec![0; n],
            communities: vec![(0..n as u32).collect()],
        }
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn community_count(&self) -> usize {
        self.communities.len()
    }

    pub fn label(&self, v: u32) -> u32 {
        self.labels[v as usize]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn communities(&self) -> &[Vec<u32>] {
        &self.communities
    }

    pub fn members(&self, c: u32) -> &[u32] {
        &self.communities[c as usize]
    }
}

/// Connection locality `exp(-dis/sigma)`: 1 at zero distance, decaying with
/// the ratio of the pair distance to the network's mean pair distance.
pub fn connection_locality(sigma_km: f64, dis_km: f64) -> Result<f64> {
    if sigma_km <= 0.0 {
        return Err(Error::NonPositiveSigma(sigma_km));
    }
    debug_assert!(dis_km >= 0.0);
    Ok((-dis_km / sigma_km).exp())
}

/// Common-neighbor count normalized by the geometric mean of the degrees.
pub fn node_similarity(net: &Network, v: u32, w: u32) -> Result<f64> {
    let (kv, kw) = (net.degree(v), net.degree(w));
    if kv == 0 {
        return Err(Error::ZeroDegreeEndpoint(v));
    }
    if kw == 0 {
        return Err(Error::ZeroDegreeEndpoint(w));
    }
    Ok(net.common_neighbor_count(v, w) as f64 / (kv as f64 * kw as f64).sqrt())
}

/// Null-model probability of an edge between nodes of the given degrees.
pub fn null_edge_probability(k_v: f64, k_w: f64, two_m: f64) -> f64 {
    k_v * k_w / two_m
}

/// Precomputed weights shared by the evaluators and the detection engine.
///
/// `omega` is the total edge weight over ordered pairs (each edge counted
/// twice) under the variant's edge-gain function; `tau` is the degree
/// constant `sum(k^2) / (2m)^2` of the similarity null model.
#[derive(Debug, Clone)]
pub struct WeightContext {
    variant: Variant,
    sigma_km: f64,
    degenerate_sigma: bool,
    /// `-1/sigma`, or 0 when weights are constant; `exp(dis * this)` is the
    /// locality weight without a branch in the inner loops.
    neg_inv_sigma: f64,
    two_m: f64,
    omega: f64,
    tau: f64,
    /// Per-edge gain weight: 1, `L`, or `S*L` by variant.
    edge_gain: Vec<f64>,
    /// Per-edge connection locality (empty for baseline).
    edge_l: Vec<f64>,
    /// Per-edge node similarity (similarity variant only).
    edge_s: Vec<f64>,
    /// Per-node null-model factor: `k` or `k^1.5` by variant.
    node_factor: Vec<f64>,
    /// Numerator factor of the null term: 1, or `tau` for the similarity
    /// variant. The full null mass is `coef * sum(L * a_v * a_w) / 2m`,
    /// divided (not multiplied by a reciprocal) so that integer-valued sums
    /// cancel exactly.
    penalty_coef: f64,
    /// Divisor of the whole functional: `2m`, `omega`, or `2*omega`.
    norm: f64,
}

impl WeightContext {
    pub fn baseline(net: &Network) -> Result<WeightContext> {
        WeightContext::build(net, Variant::Baseline, 1.0)
    }

    /// Locality variant. `sigma_km` is the mean pair distance; zero is
    /// accepted for fully coincident layouts and makes every weight 1.
    pub fn locality(net: &Network, sigma_km: f64) -> Result<WeightContext> {
        WeightContext::build(net, Variant::Locality, sigma_km)
    }

    /// Similarity variant; errors when no edge closes a triangle, which
    /// leaves the functional undefined.
    pub fn similarity(net: &Network, sigma_km: f64) -> Result<WeightContext> {
        WeightContext::build(net, Variant::Similarity, sigma_km)
    }

    fn build(net: &Network, variant: Variant, sigma_km: f64) -> Result<WeightContext> {
        if sigma_km < 0.0 {
            return Err(Error::NonPositiveSigma(sigma_km));
        }
        let degenerate_sigma = sigma_km == 0.0;
        let neg_inv_sigma = if degenerate_sigma || variant == Variant::Baseline {
            0.0
        } else {
            -1.0 / sigma_km
        };
        let m = net.edge_count();
        let two_m = 2.0 * m as f64;
        let tau = if m == 0 {
            0.0
        } else {
            net.degrees()
                .iter()
                .map(|&k| (k as f64) * (k as f64))
                .sum::<f64>()
                / (two_m * two_m)
        };

        let weight_of = |dis: f64| -> f64 { (dis * neg_inv_sigma).exp() };

        let mut edge_l = Vec::new();
        let mut edge_s = Vec::new();
        let mut edge_gain = Vec::new();
        match variant {
            Variant::Baseline => {}
            Variant::Locality => {
                edge_l = net
                    .edges()
                    .iter()
                    .map(|&(u, v)| weight_of(net.distance(u, v)))
                    .collect();
                edge_gain = edge_l.clone();
            }
            Variant::Similarity => {
                edge_l = net
                    .edges()
                    .iter()
                    .map(|&(u, v)| weight_of(net.distance(u, v)))
                    .collect();
                edge_s = net
                    .edges()
                    .iter()
                    .map(|&(u, v)| node_similarity(net, u, v))
                    .collect::<Result<Vec<f64>>>()?;
                edge_gain = edge_l.iter().zip(&edge_s).map(|(l, s)| l * s).collect();
            }
        }

        let omega = match variant {
            Variant::Baseline => two_m,
            _ => 2.0 * edge_gain.iter().sum::<f64>(),
        };
        if variant == Variant::Similarity && m > 0 && omega == 0.0 {
            return Err(Error::ZeroSimilarityMass);
        }

        let node_factor: Vec<f64> = match variant {
            Variant::Similarity => net
                .degrees()
                .iter()
                .map(|&k| (k as f64).powf(1.5))
                .collect(),
            _ => net.degrees().iter().map(|&k| k as f64).collect(),
        };
        let penalty_coef = match variant {
            Variant::Similarity => tau,
            _ => 1.0,
        };
        let norm = match variant {
            Variant::Baseline => two_m,
            Variant::Locality => omega,
            Variant::Similarity => 2.0 * omega,
        };
        Ok(WeightContext {
            variant,
            sigma_km,
            degenerate_sigma,
            neg_inv_sigma,
            two_m,
            omega,
            tau,
            edge_gain,
            edge_l,
            edge_s,
            node_factor,
            penalty_coef,
            norm,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn sigma_km(&self) -> f64 {
        self.sigma_km
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn two_m(&self) -> f64 {
        self.two_m
    }

    pub(crate) fn norm(&self) -> f64 {
        self.norm
    }

    pub(crate) fn penalty_coef(&self) -> f64 {
        self.penalty_coef
    }

    pub(crate) fn node_factor(&self) -> &[f64] {
        &self.node_factor
    }

    pub(crate) fn edge_gain(&self) -> &[f64] {
        &self.edge_gain
    }

    /// True when the null term does not vary with distance (baseline, or a
    /// fully coincident layout), so member scans can factorize.
    pub(crate) fn distance_free(&self) -> bool {
        self.variant == Variant::Baseline || self.degenerate_sigma
    }

    /// Locality weight of a pair at the given distance.
    pub fn locality_weight(&self, dis_km: f64) -> f64 {
        (dis_km * self.neg_inv_sigma).exp()
    }

    pub(crate) fn neg_inv_sigma(&self) -> f64 {
        self.neg_inv_sigma
    }

    pub fn edge_locality(&self, edge: usize) -> f64 {
        if self.variant == Variant::Baseline {
            1.0
        } else {
            self.edge_l[edge]
        }
    }

    pub fn edge_similarity(&self, edge: usize) -> f64 {
        self.edge_s[edge]
    }

    fn expect_variant(&self, wanted: Variant) -> Result<()> {
        if self.variant != wanted {
            return Err(Error::VariantMismatch {
                built: self.variant,
                wanted,
            });
        }
        Ok(())
    }

    /// Context whose functional is uniformly rescaled by `c`; merge
    /// decisions must not change under this.
    #[cfg(test)]
    pub(crate) fn with_scaled_norm(&self, c: f64) -> WeightContext {
        let mut scaled = self.clone();
        scaled.norm /= c;
        scaled
    }
}

fn require_edges(net: &Network) -> Result<()> {
    if net.edge_count() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    Ok(())
}

fn check_partition(net: &Network, p: &Partition) -> Result<()> {
    if p.node_count() != net.node_count() {
        return Err(Error::LengthMismatch {
            labels: p.node_count(),
            nodes: net.node_count(),
        });
    }
    Ok(())
}

/// Sum of gain weights over edges internal to communities, counted once per
/// edge (callers double it for the ordered-pair convention).
fn internal_gain(net: &Network, ctx: &WeightContext, p: &Partition) -> f64 {
    net.edges()
        .iter()
        .enumerate()
        .filter(|(_, &(u, v))| p.label(u) == p.label(v))
        .map(|(e, _)| match ctx.variant {
            Variant::Baseline => 1.0,
            _ => ctx.edge_gain[e],
        })
        .sum()
}

/// Null-model mass inside communities, over ordered member pairs including
/// the diagonal: `coef * sum L(v,w) * a[v] * a[w]`.
fn internal_penalty(net: &Network, ctx: &WeightContext, p: &Partition) -> f64 {
    if ctx.two_m == 0.0 {
        return 0.0;
    }
    let a = &ctx.node_factor;
    let mut total = 0.0;
    if ctx.distance_free() {
        for members in p.communities() {
            let s: f64 = members.iter().map(|&v| a[v as usize]).sum();
            total += s * s;
        }
    } else if net.metric() == crate::graph::Metric::PlanarEuclidean {
        let pts = net.points();
        let neg_inv_sigma = ctx.neg_inv_sigma;
        for members in p.communities() {
            for &v in members {
                let pv = pts[v as usize];
                let av = a[v as usize];
                let mut inner = 0.0;
                for &w in members {
                    let pw = pts[w as usize];
                    let dx = pv.x - pw.x;
                    let dy = pv.y - pw.y;
                    let d = (dx * dx + dy * dy).sqrt();
                    inner += a[w as usize] * (d * neg_inv_sigma).exp();
                }
                total += av * inner;
            }
        }
    } else {
        let pts = net.points();
        for members in p.communities() {
            for &v in members {
                let pv = pts[v as usize];
                let av = a[v as usize];
                for &w in members {
                    let d = crate::graph::point_distance(pv, pts[w as usize], net.metric());
                    total += av * a[w as usize] * ctx.locality_weight(d);
                }
            }
        }
    }
    ctx.penalty_coef * total / ctx.two_m
}

/// Plain modularity over ordered pairs (diagonal null terms included).
pub fn q_baseline(net: &Network, p: &Partition) -> Result<f64> {
    require_edges(net)?;
    check_partition(net, p)?;
    let ctx = WeightContext::baseline(net)?;
    Ok((2.0 * internal_gain(net, &ctx, p) - internal_penalty(net, &ctx, p)) / ctx.norm)
}

/// Fraction of locality-weighted edge mass internal to communities.
pub fn c_g(net: &Network, ctx: &WeightContext, p: &Partition) -> Result<f64> {
    ctx.expect_variant(Variant::Locality)?;
    require_edges(net)?;
    check_partition(net, p)?;
    Ok(2.0 * internal_gain(net, ctx, p) / ctx.omega)
}

/// Expected internal fraction under the degree null model, locality-weighted.
pub fn p_g(net: &Network, ctx: &WeightContext, p: &Partition) -> Result<f64> {
    ctx.expect_variant(Variant::Locality)?;
    require_edges(net)?;
    check_partition(net, p)?;
    Ok(internal_penalty(net, ctx, p) / ctx.omega)
}

/// Locality-weighted modularity: exactly `c_g - p_g`.
pub fn q_locality(net: &Network, ctx: &WeightContext, p: &Partition) -> Result<f64> {
    Ok(c_g(net, ctx, p)? - p_g(net, ctx, p)?)
}

/// Similarity-weighted modularity.
pub fn q_similarity(net: &Network, ctx: &WeightContext, p: &Partition) -> Result<f64> {
    ctx.expect_variant(Variant::Similarity)?;
    require_edges(net)?;
    check_partition(net, p)?;
    Ok((2.0 * internal_gain(net, ctx, p) - internal_penalty(net, ctx, p)) / ctx.norm)
}

/// Evaluate the functional the context was built for.
pub fn evaluate_q(net: &Network, ctx: &WeightContext, p: &Partition) -> Result<f64> {
    match ctx.variant {
        Variant::Baseline => q_baseline(net, p),
        Variant::Locality => q_locality(net, ctx, p),
        Variant::Similarity => q_similarity(net, ctx, p),
    }
}

/// Quality of the all-singletons partition: only diagonal null terms
/// survive, so this is a cheap closed form.
pub fn q_singletons(net: &Network, ctx: &WeightContext) -> f64 {
    if net.edge_count() == 0 {
        return 0.0;
    }
    let diag: f64 = ctx.node_factor.iter().map(|&a| a * a).sum();
    -ctx.penalty_coef * diag / (ctx.two_m * ctx.norm)
}

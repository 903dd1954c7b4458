//! Incremental greedy agglomeration.
//!
//! Starts from singleton communities and repeatedly merges the pair with the
//! largest quality gain until no merge improves the functional. Gains are
//! held in per-community ordered maps (entries exist only for community
//! pairs joined by at least one edge) plus a global max-heap with lazy
//! invalidation: popped entries are checked against the maps and skipped
//! when stale. Every gain is defined as the exact from-scratch difference of
//! the active variant's functional, so the running quality trace can be
//! audited against the evaluators at any step.

use std::collections::BTreeMap;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::graph::Network;
use crate::locality::mean_pair_distance;
use crate::modularity::{evaluate_q, q_singletons, Partition, Variant, WeightContext};

/// Tunables for a detection run.
#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    /// Recompute the quality from scratch every this many merges and abort
    /// on drift beyond 1e-6. Defaults to every 1024 merges in debug builds
    /// and off in release builds.
    pub audit_interval: Option<usize>,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            audit_interval: if cfg!(debug_assertions) {
                Some(1024)
            } else {
                None
            },
        }
    }
}

const AUDIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    gain: f64,
    a: u32,
    b: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Larger gain wins; on ties the lexicographically smallest pair.
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| (other.a, other.b).cmp(&(self.a, self.b)))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// One executed merge. `a < b` is the popped pair; `survivor` is the id the
/// merged community keeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeRecord {
    pub step: usize,
    pub a: u32,
    pub b: u32,
    pub survivor: u32,
    pub delta_q: f64,
    pub q_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MergeOutcome {
    Merged(MergeRecord),
    /// No remaining pair improves the functional.
    Stopped,
}

/// Mutable agglomeration state: per-community gain maps, member lists, and
/// the global max structure.
#[derive(Debug, Clone)]
pub struct DeltaQLedger {
    rows: Vec<BTreeMap<u32, f64>>,
    members: Vec<Vec<u32>>,
    alive: Vec<bool>,
    live: usize,
    heap: BinaryHeap<HeapEntry>,
    q: f64,
    step: usize,
    trace: Vec<(usize, f64)>,
    audit_interval: Option<usize>,
}

impl DeltaQLedger {
    /// One singleton community per node; a gain entry per edge.
    pub fn init(net: &Network, ctx: &WeightContext, options: EngineOptions) -> DeltaQLedger {
        let n = net.node_count();
        let mut rows = vec![BTreeMap::new(); n];
        let mut heap = BinaryHeap::with_capacity(net.edge_count());
        let factor = ctx.node_factor();
        for (e, &(i, j)) in net.edges().iter().enumerate() {
            let gain_w = match ctx.variant() {
                Variant::Baseline => 1.0,
                _ => ctx.edge_gain()[e],
            };
            let l = ctx.edge_locality(e);
            let null =
                ctx.penalty_coef() * l * factor[i as usize] * factor[j as usize] / ctx.two_m();
            let dq = 2.0 * (gain_w - null) / ctx.norm();
            rows[i as usize].insert(j, dq);
            rows[j as usize].insert(i, dq);
            heap.push(HeapEntry {
                gain: dq,
                a: i,
                b: j,
            });
        }
        let q = q_singletons(net, ctx);
        DeltaQLedger {
            rows,
            members: (0..n as u32).map(|v| vec![v]).collect(),
            alive: vec![true; n],
            live: n,
            heap,
            q,
            step: 0,
            trace: vec![(0, q)],
            audit_interval: options.audit_interval,
        }
    }

    pub fn live_communities(&self) -> usize {
        self.live
    }

    pub fn merges_done(&self) -> usize {
        self.step
    }

    /// Current quality of the partition held by the ledger.
    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn trace(&self) -> &[(usize, f64)] {
        &self.trace
    }

    /// Stored gain for an adjacent live pair.
    pub fn gain(&self, i: u32, j: u32) -> Option<f64> {
        self.rows[i as usize].get(&j).copied()
    }

    pub fn members(&self, c: u32) -> &[u32] {
        &self.members[c as usize]
    }

    /// Current community assignment, compacted to dense ids.
    pub fn partition(&self) -> Partition {
        let n = self.members.iter().map(|m| m.len()).sum();
        let mut labels = vec![0u32; n];
        for (c, members) in self.members.iter().enumerate() {
            if self.alive[c] {
                for &v in members {
                    labels[v as usize] = c as u32;
                }
            }
        }
        Partition::from_labels(&labels)
    }

    /// Pure null-model loss of merging two non-adjacent live communities.
    /// Always `<= 0`. Adjacent pairs must use the stored gain entry.
    pub fn cross_penalty(&self, net: &Network, ctx: &WeightContext, j: u32, k: u32) -> Result<f64> {
        if j == k || !self.alive[j as usize] || !self.alive[k as usize] {
            return Err(Error::InvalidConfig(format!(
                "cross penalty needs two distinct live communities, got {j} and {k}"
            )));
        }
        if self.rows[j as usize].contains_key(&k) {
            return Err(Error::AdjacentCommunities(j, k));
        }
        Ok(pair_penalty(
            net,
            ctx,
            &self.members[j as usize],
            &self.members[k as usize],
        ))
    }

    /// Pop the best pair and merge it, or report that no positive gain is
    /// left. Panics on internal inconsistency.
    pub fn merge_step(&mut self, net: &Network, ctx: &WeightContext) -> MergeOutcome {
        let (i, j, dq) = loop {
            let Some(entry) = self.heap.pop() else {
                return MergeOutcome::Stopped;
            };
            let (a, b) = (entry.a, entry.b);
            if !self.alive[a as usize] || !self.alive[b as usize] {
                continue;
            }
            // Stale unless the maps still hold exactly this value.
            if self.rows[a as usize].get(&b) != Some(&entry.gain) {
                continue;
            }
            debug_assert_eq!(
                self.rows[b as usize].get(&a),
                Some(&entry.gain),
                "gain map asymmetry on pair ({a}, {b})"
            );
            if entry.gain <= 0.0 {
                self.heap.push(entry);
                return MergeOutcome::Stopped;
            }
            break (a, b, entry.gain);
        };

        // Survivor keeps the id of the larger community; ties go to the
        // smaller id.
        let (survivor, absorbed) =
            if self.members[i as usize].len() >= self.members[j as usize].len() {
                (i, j)
            } else {
                (j, i)
            };

        // New gains toward every community adjacent to either side, using
        // pre-merge member lists. Missing sides contribute their pure
        // null-model loss.
        let mut updates: Vec<(u32, f64)> = Vec::new();
        let row_i = std::mem::take(&mut self.rows[i as usize]);
        let row_j = std::mem::take(&mut self.rows[j as usize]);
        for (&l, &dq_il) in &row_i {
            if l == j {
                continue;
            }
            let combined = match row_j.get(&l) {
                Some(&dq_jl) => dq_il + dq_jl,
                None => {
                    dq_il
                        + pair_penalty(
                            net,
                            ctx,
                            &self.members[j as usize],
                            &self.members[l as usize],
                        )
                }
            };
            updates.push((l, combined));
        }
        for (&l, &dq_jl) in &row_j {
            if l == i || row_i.contains_key(&l) {
                continue;
            }
            let combined = dq_jl
                + pair_penalty(
                    net,
                    ctx,
                    &self.members[i as usize],
                    &self.members[l as usize],
                );
            updates.push((l, combined));
        }

        for &(l, _) in &updates {
            self.rows[l as usize].remove(&i);
            self.rows[l as usize].remove(&j);
        }
        for &(l, dq_new) in &updates {
            self.rows[survivor as usize].insert(l, dq_new);
            self.rows[l as usize].insert(survivor, dq_new);
            self.heap.push(HeapEntry {
                gain: dq_new,
                a: survivor.min(l),
                b: survivor.max(l),
            });
        }

        let absorbed_members = std::mem::take(&mut self.members[absorbed as usize]);
        self.members[survivor as usize].extend(absorbed_members);
        self.alive[absorbed as usize] = false;
        self.live -= 1;
        self.step += 1;
        self.q += dq;
        self.trace.push((self.step, self.q));

        if let Some(every) = self.audit_interval {
            if self.step.is_multiple_of(every) {
                let fresh = evaluate_q(net, ctx, &self.partition())
                    .expect("audit re-evaluation cannot fail mid-run");
                assert!(
                    (fresh - self.q).abs() <= AUDIT_TOLERANCE,
                    "quality trace drifted: running {} vs recomputed {} at step {}",
                    self.q,
                    fresh,
                    self.step
                );
                self.q = fresh;
            }
        }

        MergeOutcome::Merged(MergeRecord {
            step: self.step,
            a: i,
            b: j,
            survivor,
            delta_q: dq,
            q_after: self.q,
        })
    }

    #[cfg(test)]
    fn assert_symmetric(&self) {
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, &dq) in row {
                assert_eq!(
                    self.rows[j as usize].get(&(i as u32)),
                    Some(&dq),
                    "asymmetry at ({i}, {j})"
                );
            }
        }
    }
}

/// Null-model mass between two member lists, in gain units:
/// `-2 * coef * sum L(v,w) * a[v] * a[w] / norm`.
fn pair_penalty(net: &Network, ctx: &WeightContext, xs: &[u32], ys: &[u32]) -> f64 {
    if ctx.two_m() == 0.0 {
        return 0.0;
    }
    let factor = ctx.node_factor();
    let total = if ctx.distance_free() {
        let sx: f64 = xs.iter().map(|&v| factor[v as usize]).sum();
        let sy: f64 = ys.iter().map(|&v| factor[v as usize]).sum();
        sx * sy
    } else if net.metric() == crate::graph::Metric::PlanarEuclidean {
        // Hottest loop of the whole engine; the planar form is kept branch
        // free and division free.
        let pts = net.points();
        let neg_inv_sigma = ctx.neg_inv_sigma();
        let mut acc = 0.0;
        for &v in xs {
            let pv = pts[v as usize];
            let av = factor[v as usize];
            let mut inner = 0.0;
            for &w in ys {
                let pw = pts[w as usize];
                let dx = pv.x - pw.x;
                let dy = pv.y - pw.y;
                let d = (dx * dx + dy * dy).sqrt();
                inner += factor[w as usize] * (d * neg_inv_sigma).exp();
            }
            acc += av * inner;
        }
        acc
    } else {
        let pts = net.points();
        let metric = net.metric();
        let mut acc = 0.0;
        for &v in xs {
            let pv = pts[v as usize];
            let av = factor[v as usize];
            let mut inner = 0.0;
            for &w in ys {
                let d = crate::graph::point_distance(pv, pts[w as usize], metric);
                inner += factor[w as usize] * ctx.locality_weight(d);
            }
            acc += av * inner;
        }
        acc
    };
    -2.0 * ctx.penalty_coef() * total / (ctx.two_m() * ctx.norm())
}

/// Full merge history plus the final partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    pub merges: Vec<MergeRecord>,
    /// Quality of the all-singletons start state.
    pub q_initial: f64,
    pub partition: Partition,
}

impl Dendrogram {
    pub fn final_q(&self) -> f64 {
        self.merges
            .last()
            .map(|r| r.q_after)
            .unwrap_or(self.q_initial)
    }
}

/// Run agglomeration to the fixpoint with a prepared weight context.
pub fn detect_with_context(
    net: &Network,
    ctx: &WeightContext,
    options: EngineOptions,
) -> Dendrogram {
    let mut ledger = DeltaQLedger::init(net, ctx, options);
    let q_initial = ledger.q();
    let mut merges = Vec::new();
    while let MergeOutcome::Merged(record) = ledger.merge_step(net, ctx) {
        merges.push(record);
    }
    Dendrogram {
        merges,
        q_initial,
        partition: ledger.partition(),
    }
}

/// Detect communities under the given variant. For the locality and
/// similarity variants the decay scale sigma is estimated first as the mean
/// pair distance over at most `sample_size` seeded pairs.
pub fn detect(
    net: &Network,
    variant: Variant,
    sample_size: usize,
    seed: u64,
    options: EngineOptions,
) -> Result<Dendrogram> {
    let ctx = build_context(net, variant, sample_size, seed)?;
    Ok(detect_with_context(net, &ctx, options))
}

/// Build the weight context for a variant, sampling sigma when needed.
pub fn build_context(
    net: &Network,
    variant: Variant,
    sample_size: usize,
    seed: u64,
) -> Result<WeightContext> {
    match variant {
        Variant::Baseline => WeightContext::baseline(net),
        Variant::Locality | Variant::Similarity => {
            let sigma = if net.node_count() < 2 {
                0.0
            } else {
                mean_pair_distance(net, sample_size, seed)?
            };
            match variant {
                Variant::Locality => WeightContext::locality(net, sigma),
                _ => WeightContext::similarity(net, sigma),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GeoPoint, Metric, Network};
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn planar(points: &[(f64, f64)], edges: &[(u32, u32)]) -> Network {
        let pts = points.iter().map(|&(x, y)| GeoPoint::new(x, y)).collect();
        Network::from_indexed(pts, edges.to_vec(), Metric::PlanarEuclidean).unwrap()
    }

    fn k3_coincident() -> Network {
        planar(
            &[(0.0, 0.0), (0.0, 0.0), (0.0, 0.0)],
            &[(0, 1), (1, 2), (0, 2)],
        )
    }

    fn random_network(n: usize, p: f64, scale: f64, seed: u64) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.random::<f64>() * scale, rng.random::<f64>() * scale))
            .collect();
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        planar(&pts, &edges)
    }

    fn contexts_for(net: &Network) -> Vec<WeightContext> {
        let sigma = mean_pair_distance(net, 1 << 20, 1).unwrap();
        let mut out = vec![
            WeightContext::baseline(net).unwrap(),
            WeightContext::locality(net, sigma).unwrap(),
        ];
        if let Ok(ctx) = WeightContext::similarity(net, sigma) {
            out.push(ctx);
        }
        out
    }

    /// Replay a merge prefix as a partition over the original nodes.
    fn partition_after(n: usize, merges: &[MergeRecord]) -> Partition {
        let mut labels: Vec<u32> = (0..n as u32).collect();
        for r in merges {
            let absorbed = if r.survivor == r.a { r.b } else { r.a };
            for l in labels.iter_mut() {
                if *l == absorbed {
                    *l = r.survivor;
                }
            }
        }
        Partition::from_labels(&labels)
    }

    #[test]
    fn similarity_needs_triangles() {
        let pair = planar(&[(0.0, 0.0), (1.0, 0.0)], &[(0, 1)]);
        let err = WeightContext::similarity(&pair, 0.5).unwrap_err();
        assert!(matches!(err, Error::ZeroSimilarityMass));
    }

    #[test]
    fn k3_coincident_locality_init_gains() {
        let net = k3_coincident();
        let ctx = WeightContext::locality(&net, 0.0).unwrap();
        let ledger = DeltaQLedger::init(&net, &ctx, EngineOptions::default());
        for (i, j) in [(0u32, 1u32), (1, 2), (0, 2)] {
            let dq = ledger.gain(i, j).unwrap();
            assert!((dq - 1.0 / 9.0).abs() < 1e-15, "dq = {dq}");
        }
    }

    #[test]
    fn init_gains_equal_oracle_differences() {
        for seed in 0..8u64 {
            let net = random_network(12, 0.5, 6.0, seed);
            if net.edge_count() == 0 {
                continue;
            }
            for ctx in contexts_for(&net) {
                let ledger = DeltaQLedger::init(&net, &ctx, EngineOptions::default());
                let q0 = evaluate_q(&net, &ctx, &Partition::singletons(12)).unwrap();
                assert!((ledger.q() - q0).abs() < 1e-12);
                for &(i, j) in net.edges() {
                    let mut labels: Vec<u32> = (0..12).collect();
                    labels[j as usize] = i;
                    let merged = Partition::from_labels(&labels);
                    let oracle = evaluate_q(&net, &ctx, &merged).unwrap() - q0;
                    let dq = ledger.gain(i, j).unwrap();
                    assert!(
                        (dq - oracle).abs() < 1e-12,
                        "variant {:?} edge ({i},{j}): {dq} vs {oracle}",
                        ctx.variant()
                    );
                }
            }
        }
    }

    #[test]
    fn cross_penalty_matches_formula_and_oracle() {
        // Square of triangles is overkill; a 5-node graph with one
        // non-adjacent pair suffices.
        let net = planar(
            &[(0.0, 0.0), (1.0, 0.0), (0.5, 0.8), (4.0, 0.0), (5.0, 0.0)],
            &[(0, 1), (1, 2), (0, 2), (2, 3), (3, 4)],
        );
        let sigma = mean_pair_distance(&net, 1 << 20, 1).unwrap();
        let ctx = WeightContext::similarity(&net, sigma).unwrap();
        let ledger = DeltaQLedger::init(&net, &ctx, EngineOptions::default());

        let got = ledger.cross_penalty(&net, &ctx, 0, 4).unwrap();
        let (k0, k4) = (net.degree(0) as f64, net.degree(4) as f64);
        let l = ctx.locality_weight(net.distance(0, 4));
        let manual = -ctx.tau() * l * (k0 * k4).powf(1.5) / (ctx.two_m() * ctx.omega());
        assert!((got - manual).abs() < 1e-15, "{got} vs {manual}");

        let q0 = evaluate_q(&net, &ctx, &Partition::singletons(5)).unwrap();
        let merged = Partition::from_labels(&[0, 1, 2, 3, 0]);
        let oracle = evaluate_q(&net, &ctx, &merged).unwrap() - q0;
        assert!((got - oracle).abs() < 1e-12);
        assert!(got <= 0.0);
    }

    #[test]
    fn cross_penalty_vanishes_at_long_range() {
        let net = planar(
            &[(0.0, 0.0), (1.0, 0.0), (1e7, 0.0), (1e7 + 1.0, 0.0)],
            &[(0, 1), (1, 2), (2, 3)],
        );
        let ctx = WeightContext::locality(&net, 1.0).unwrap();
        let ledger = DeltaQLedger::init(&net, &ctx, EngineOptions::default());
        let p = ledger.cross_penalty(&net, &ctx, 0, 3).unwrap();
        assert!(p.abs() < 1e-12 && p <= 0.0);
    }

    #[test]
    fn cross_penalty_rejects_adjacent_pairs() {
        let net = k3_coincident();
        let ctx = WeightContext::locality(&net, 0.0).unwrap();
        let ledger = DeltaQLedger::init(&net, &ctx, EngineOptions::default());
        assert!(matches!(
            ledger.cross_penalty(&net, &ctx, 0, 1),
            Err(Error::AdjacentCommunities(0, 1))
        ));
    }

    #[test]
    fn k3_ties_break_toward_smallest_pair() {
        let net = k3_coincident();
        let ctx = WeightContext::locality(&net, 0.0).unwrap();
        let mut ledger = DeltaQLedger::init(&net, &ctx, EngineOptions::default());
        match ledger.merge_step(&net, &ctx) {
            MergeOutcome::Merged(r) => {
                assert_eq!((r.a, r.b), (0, 1));
                assert!((r.delta_q - 1.0 / 9.0).abs() < 1e-15);
            }
            MergeOutcome::Stopped => panic!("expected a merge"),
        }
        ledger.assert_symmetric();
    }

    #[test]
    fn trace_increments_match_oracle_on_random_graphs() {
        for seed in 0..6u64 {
            let net = random_network(20, 0.3, 8.0, seed + 100);
            if net.edge_count() == 0 {
                continue;
            }
            for ctx in contexts_for(&net) {
                let d = detect_with_context(&net, &ctx, EngineOptions::default());
                let mut prev_q = evaluate_q(&net, &ctx, &Partition::singletons(20)).unwrap();
                assert!((d.q_initial - prev_q).abs() < 1e-12);
                for t in 0..d.merges.len() {
                    let p = partition_after(20, &d.merges[..=t]);
                    let q_now = evaluate_q(&net, &ctx, &p).unwrap();
                    let oracle_dq = q_now - prev_q;
                    assert!(
                        (d.merges[t].delta_q - oracle_dq).abs() < 1e-9,
                        "variant {:?} step {}: {} vs {}",
                        ctx.variant(),
                        t,
                        d.merges[t].delta_q,
                        oracle_dq
                    );
                    prev_q = q_now;
                }
            }
        }
    }

    #[test]
    fn every_stored_gain_stays_oracle_exact_through_merges() {
        // Stronger than checking applied gains: after each merge, every
        // live ledger entry must equal the from-scratch difference of
        // merging that pair, and entries must exist exactly for
        // edge-adjacent live pairs.
        for seed in 0..4u64 {
            let n = 14;
            let net = random_network(n, 0.45, 4.0, seed + 300);
            if net.edge_count() == 0 {
                continue;
            }
            for ctx in contexts_for(&net) {
                let mut ledger = DeltaQLedger::init(&net, &ctx, EngineOptions::default());
                loop {
                    let labels_now = {
                        let mut labels = vec![0u32; n];
                        for c in 0..n as u32 {
                            if !ledger.members(c).is_empty() {
                                for &v in ledger.members(c) {
                                    labels[v as usize] = c;
                                }
                            }
                        }
                        labels
                    };
                    let q_now =
                        evaluate_q(&net, &ctx, &Partition::from_labels(&labels_now)).unwrap();
                    let live: Vec<u32> = (0..n as u32)
                        .filter(|&c| !ledger.members(c).is_empty())
                        .collect();
                    for (ai, &a) in live.iter().enumerate() {
                        for &b in &live[ai + 1..] {
                            let crossing = ledger
                                .members(a)
                                .iter()
                                .any(|&v| ledger.members(b).iter().any(|&w| net.has_edge(v, w)));
                            let entry = ledger.gain(a, b);
                            assert_eq!(
                                entry.is_some(),
                                crossing,
                                "variant {:?}: entry presence wrong for ({a},{b})",
                                ctx.variant()
                            );
                            if let Some(dq) = entry {
                                let mut labels = labels_now.clone();
                                for l in labels.iter_mut() {
                                    if *l == b {
                                        *l = a;
                                    }
                                }
                                let q_merged =
                                    evaluate_q(&net, &ctx, &Partition::from_labels(&labels))
                                        .unwrap();
                                assert!(
                                    (dq - (q_merged - q_now)).abs() < 1e-9,
                                    "variant {:?}: stored {dq} vs oracle {} for ({a},{b})",
                                    ctx.variant(),
                                    q_merged - q_now
                                );
                            }
                        }
                    }
                    match ledger.merge_step(&net, &ctx) {
                        MergeOutcome::Merged(_) => {}
                        MergeOutcome::Stopped => break,
                    }
                }
            }
        }
    }

    #[test]
    fn ledger_stays_symmetric_through_merges() {
        let net = random_network(25, 0.25, 10.0, 7);
        let sigma = mean_pair_distance(&net, 1 << 20, 1).unwrap();
        let ctx = WeightContext::locality(&net, sigma).unwrap();
        let mut ledger = DeltaQLedger::init(&net, &ctx, EngineOptions::default());
        let mut merges = 0;
        while let MergeOutcome::Merged(_) = ledger.merge_step(&net, &ctx) {
            ledger.assert_symmetric();
            merges += 1;
            assert_eq!(ledger.live_communities() + merges, 25);
        }
        assert!(merges <= 24);
    }

    /// All set partitions of n labeled items, as label vectors.
    fn set_partitions(n: usize) -> Vec<Vec<u32>> {
        // Restricted growth strings.
        let mut out = Vec::new();
        let mut labels = vec![0u32; n];
        fn rec(labels: &mut Vec<u32>, pos: usize, max_used: u32, out: &mut Vec<Vec<u32>>) {
            if pos == labels.len() {
                out.push(labels.clone());
                return;
            }
            for l in 0..=max_used + 1 {
                labels[pos] = l;
                rec(labels, pos + 1, max_used.max(l), out);
            }
        }
        rec(&mut labels, 1, 0, &mut out);
        out
    }

    #[test]
    fn distant_triangles_split_and_win_the_partition_sweep() {
        let far = 1000.0;
        let net = planar(
            &[
                (0.0, 0.0),
                (1.0, 0.0),
                (0.5, 0.9),
                (far, 0.0),
                (far + 1.0, 0.0),
                (far + 0.5, 0.9),
            ],
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)],
        );
        let sigma = mean_pair_distance(&net, 1 << 20, 1).unwrap();
        let ctx = WeightContext::locality(&net, sigma).unwrap();
        let d = detect_with_context(&net, &ctx, EngineOptions::default());
        let want = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
        assert_eq!(d.partition, want);

        // Exhaustive sweep: the two triangles maximize the functional over
        // all 203 partitions of 6 nodes.
        let all = set_partitions(6);
        assert_eq!(all.len(), 203);
        let mut best = f64::NEG_INFINITY;
        let mut best_labels = Vec::new();
        for labels in all {
            let q = evaluate_q(&net, &ctx, &Partition::from_labels(&labels)).unwrap();
            if q > best {
                best = q;
                best_labels = labels;
            }
        }
        assert_eq!(Partition::from_labels(&best_labels), want);
        assert!((d.final_q() - best).abs() < 1e-12);
    }

    #[test]
    fn single_node_yields_empty_dendrogram() {
        let net = planar(&[(0.0, 0.0)], &[]);
        let ctx = WeightContext::baseline(&net).unwrap();
        let d = detect_with_context(&net, &ctx, EngineOptions::default());
        assert!(d.merges.is_empty());
        assert_eq!(d.partition.community_count(), 1);
        assert_eq!(d.q_initial, 0.0);
    }

    #[test]
    fn isolated_node_stays_a_singleton_community() {
        let net = planar(
            &[(0.0, 0.0), (1.0, 0.0), (0.5, 0.9), (50.0, 50.0)],
            &[(0, 1), (1, 2), (0, 2)],
        );
        let sigma = mean_pair_distance(&net, 1 << 20, 1).unwrap();
        let ctx = WeightContext::locality(&net, sigma).unwrap();
        let d = detect_with_context(&net, &ctx, EngineOptions::default());
        assert_eq!(d.partition.community_count(), 2);
        assert_eq!(d.partition.members(d.partition.label(3)), &[3]);
    }

    #[test]
    fn baseline_on_disjoint_triangles() {
        let net = planar(
            &[
                (0.0, 0.0),
                (1.0, 0.0),
                (0.5, 0.9),
                (9.0, 0.0),
                (10.0, 0.0),
                (9.5, 0.9),
            ],
            &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
        );
        let d = detect(
            &net,
            Variant::Baseline,
            1 << 20,
            1,
            EngineOptions::default(),
        )
        .unwrap();
        assert_eq!(d.partition.community_count(), 2);
        assert!((d.final_q() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn detection_is_deterministic() {
        let net = random_network(30, 0.2, 12.0, 55);
        let a = detect(
            &net,
            Variant::Locality,
            1 << 20,
            9,
            EngineOptions::default(),
        )
        .unwrap();
        let b = detect(
            &net,
            Variant::Locality,
            1 << 20,
            9,
            EngineOptions::default(),
        )
        .unwrap();
        assert_eq!(a.merges, b.merges);
        assert_eq!(a.partition, b.partition);
    }

    #[test]
    fn merge_sequence_is_scale_invariant() {
        let net = random_network(24, 0.3, 9.0, 21);
        let sigma = mean_pair_distance(&net, 1 << 20, 1).unwrap();
        let ctx = WeightContext::locality(&net, sigma).unwrap();
        let scaled = ctx.with_scaled_norm(3.7);
        let a = detect_with_context(
            &net,
            &ctx,
            EngineOptions {
                audit_interval: None,
            },
        );
        let b = detect_with_context(
            &net,
            &scaled,
            EngineOptions {
                audit_interval: None,
            },
        );
        let pairs_a: Vec<(u32, u32)> = a.merges.iter().map(|r| (r.a, r.b)).collect();
        let pairs_b: Vec<(u32, u32)> = b.merges.iter().map(|r| (r.a, r.b)).collect();
        assert_eq!(pairs_a, pairs_b);
        assert_eq!(a.partition, b.partition);
    }

    #[test]
    fn stop_signal_repeats_at_fixpoint() {
        let net = k3_coincident();
        let ctx = WeightContext::baseline(&net).unwrap();
        let mut ledger = DeltaQLedger::init(&net, &ctx, EngineOptions::default());
        while let MergeOutcome::Merged(_) = ledger.merge_step(&net, &ctx) {}
        assert_eq!(ledger.merge_step(&net, &ctx), MergeOutcome::Stopped);
        assert_eq!(ledger.merge_step(&net, &ctx), MergeOutcome::Stopped);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn applied_gains_match_oracle(seed in 0u64..10_000, n in 5usize..18, p in 0.2f64..0.8) {
            let net = random_network(n, p, 5.0, seed);
            prop_assume!(net.edge_count() > 0);
            let sigma = mean_pair_distance(&net, 1 << 20, 1).unwrap();
            prop_assume!(sigma > 0.0);
            let ctx = WeightContext::locality(&net, sigma).unwrap();
            let d = detect_with_context(&net, &ctx, EngineOptions::default());
            let mut prev = d.q_initial;
            for t in 0..d.merges.len() {
                let part = partition_after(n, &d.merges[..=t]);
                let q_now = evaluate_q(&net, &ctx, &part).unwrap();
                prop_assert!((d.merges[t].delta_q - (q_now - prev)).abs() < 1e-9);
                prev = q_now;
            }
        }
    }
}

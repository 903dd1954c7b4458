//! Detect communities in a location-tagged network with the similarity
//! variant and inspect the merge history.
//!
//! Run with: cargo run --example detect_communities

use geocommunity::engine::{build_context, detect_with_context, EngineOptions};
use geocommunity::locality::DEFAULT_PAIR_SAMPLE;
use geocommunity::synth::{generate, SynthConfig};
use geocommunity::Variant;

fn main() -> geocommunity::Result<()> {
    let cfg = SynthConfig {
        grid_side: 25,
        node_count: 625,
        label_count: 5,
        omega: 2.0,
        target_avg_degree: 10.0,
        seed: 11,
        ..SynthConfig::default()
    };
    let synth = generate(&cfg)?;
    let net = &synth.network;

    let ctx = build_context(net, Variant::Similarity, DEFAULT_PAIR_SAMPLE, 11)?;
    println!(
        "weights: sigma = {:.2} km, omega (total edge weight) = {:.4}, tau = {:.3e}",
        ctx.sigma_km(),
        ctx.omega(),
        ctx.tau()
    );

    let dendrogram = detect_with_context(net, &ctx, EngineOptions::default());
    println!(
        "{} merges, quality {:.4} -> {:.4}",
        dendrogram.merges.len(),
        dendrogram.q_initial,
        dendrogram.final_q()
    );
    println!("first merges (step, pair, gain):");
    for r in dendrogram.merges.iter().take(5) {
        println!("  {:>4}  ({}, {})  {:+.6}", r.step, r.a, r.b, r.delta_q);
    }

    let partition = &dendrogram.partition;
    let mut sizes: Vec<usize> = partition.communities().iter().map(|c| c.len()).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    println!(
        "{} communities; largest sizes {:?}",
        partition.community_count(),
        &sizes[..sizes.len().min(8)]
    );
    Ok(())
}

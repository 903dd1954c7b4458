//! Time detection across network sizes to see how the engine scales.
//!
//! Run with: cargo run --release --example benchmark_scaling

use std::time::Instant;

use geocommunity::engine::{build_context, detect_with_context, EngineOptions};
use geocommunity::locality::DEFAULT_PAIR_SAMPLE;
use geocommunity::synth::{generate, SynthConfig};
use geocommunity::Variant;

fn main() -> geocommunity::Result<()> {
    println!(
        "{:>7} {:>8} {:>13} {:>12} {:>12}",
        "n", "m", "generate_ms", "detect_ms", "communities"
    );
    for size in [500u32, 1000, 2500, 5000] {
        let cfg = SynthConfig {
            omega: 3.0,
            seed: 1,
            ..SynthConfig::with_node_count(size)
        };
        let started = Instant::now();
        let synth = generate(&cfg)?;
        let generate_ms = started.elapsed().as_secs_f64() * 1000.0;

        let started = Instant::now();
        let ctx = build_context(&synth.network, Variant::Similarity, DEFAULT_PAIR_SAMPLE, 1)?;
        let d = detect_with_context(
            &synth.network,
            &ctx,
            EngineOptions {
                audit_interval: None,
            },
        );
        let detect_ms = started.elapsed().as_secs_f64() * 1000.0;

        println!(
            "{:>7} {:>8} {:>13.1} {:>12.1} {:>12}",
            synth.network.node_count(),
            synth.network.edge_count(),
            generate_ms,
            detect_ms,
            d.partition.community_count()
        );
    }
    println!("\nthe detect subcommand exposes the same sweep over arbitrary sizes (see `geocommunity benchmark --help`)");
    Ok(())
}

//! Generate a planted-partition benchmark network and write the standard
//! edge/location/label files.
//!
//! Run with: cargo run --example generate_synthetic

use geocommunity::io::write_synth_files;
use geocommunity::synth::{generate, SynthConfig};

fn main() -> geocommunity::Result<()> {
    let cfg = SynthConfig {
        grid_side: 30,
        node_count: 900,
        label_count: 6,
        omega: 3.0,
        target_avg_degree: 12.0,
        seed: 7,
        ..SynthConfig::default()
    };
    let synth = generate(&cfg)?;
    let net = &synth.network;
    println!(
        "generated {} nodes and {} edges (mean degree {:.2})",
        net.node_count(),
        net.edge_count(),
        2.0 * net.edge_count() as f64 / net.node_count() as f64
    );

    let mean_edge_km: f64 = net
        .edges()
        .iter()
        .map(|&(u, v)| net.distance(u, v))
        .sum::<f64>()
        / net.edge_count() as f64;
    println!(
        "mean edge length {mean_edge_km:.2} km (distance decay omega = {} km)",
        cfg.omega
    );

    let mut label_sizes = vec![0usize; cfg.label_count as usize];
    for &l in &synth.true_labels {
        label_sizes[l as usize] += 1;
    }
    println!("planted label sizes: {label_sizes:?}");

    let dir = std::env::temp_dir().join("geocommunity-generate-demo");
    let [edges, locations, labels] = write_synth_files(&dir, &synth, &cfg)?;
    println!(
        "wrote:\n  {}\n  {}\n  {}",
        edges.display(),
        locations.display(),
        labels.display()
    );
    Ok(())
}

//! Pipeline operations behind the CLI subcommands. Each writes its output
//! files plus a `manifest.txt` that pins inputs, seeds, sample sizes, and
//! per-phase wall-clock timings, so any run can be reproduced exactly.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::engine::{build_context, detect_with_context, EngineOptions};
use crate::error::Result;
use crate::graph::{load_network, Metric, Network};
use crate::io::{
    write_dendrogram_csv, write_locality_files, write_partition, write_scores_csv,
    write_synth_files, Manifest,
};
use crate::locality::locality_report;
use crate::metrics::{accuracy, random_partition, score_partition, size_profile, SizeBucket};
use crate::modularity::{Partition, Variant};
use crate::synth::{generate, SynthConfig};

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn load_inputs(
    edges: &Path,
    locations: &Path,
    metric: Metric,
    manifest: &mut Manifest,
) -> Result<Network> {
    let started = Instant::now();
    let (net, stats) = load_network(edges, locations, metric)?;
    manifest.push("edges", edges.display());
    manifest.push("locations", locations.display());
    manifest.push("metric", metric.name());
    manifest.push("nodes", net.node_count());
    manifest.push("edges_loaded", net.edge_count());
    manifest.push("self_loops_dropped", stats.self_loops_dropped);
    manifest.push("duplicate_edges_dropped", stats.duplicate_edges_dropped);
    manifest.push_duration("phase_load_ms", started.elapsed());
    if stats.self_loops_dropped > 0 || stats.duplicate_edges_dropped > 0 {
        eprintln!(
            "warning: dropped {} self-loops and {} duplicate edges",
            stats.self_loops_dropped, stats.duplicate_edges_dropped
        );
    }
    Ok(net)
}

/// Generate a synthetic network into `out_dir`: edges, locations, labels,
/// manifest.
pub fn cmd_generate(cfg: &SynthConfig, out_dir: &Path) -> Result<()> {
    ensure_dir(out_dir)?;
    let mut manifest = Manifest::new("generate");
    manifest.push("grid_side", cfg.grid_side);
    manifest.push("node_count", cfg.node_count);
    manifest.push("label_count", cfg.label_count);
    manifest.push("omega", cfg.omega);
    manifest.push("p_same", cfg.p_same);
    manifest.push("p_diff", cfg.p_diff);
    manifest.push("target_avg_degree", cfg.target_avg_degree);
    manifest.push("seed", cfg.seed);

    let started = Instant::now();
    let synth = generate(cfg)?;
    manifest.push_duration("phase_generate_ms", started.elapsed());
    let mean_degree = 2.0 * synth.network.edge_count() as f64 / synth.network.node_count() as f64;
    manifest.push("edges_generated", synth.network.edge_count());
    manifest.push("mean_degree", format!("{mean_degree:.4}"));

    let started = Instant::now();
    let [e, l, t] = write_synth_files(out_dir, &synth, cfg)?;
    manifest.push_duration("phase_write_ms", started.elapsed());
    manifest.push("out_edges", e.display());
    manifest.push("out_locations", l.display());
    manifest.push("out_labels", t.display());
    manifest.write(&out_dir.join("manifest.txt"))?;

    println!(
        "generated {} nodes, {} edges (mean degree {:.2}) into {}",
        synth.network.node_count(),
        synth.network.edge_count(),
        mean_degree,
        out_dir.display()
    );
    Ok(())
}

/// Run the locality diagnostic and write report + CDF files.
pub fn cmd_analyze(
    edges: &Path,
    locations: &Path,
    metric: Metric,
    sample_size: usize,
    seed: u64,
    out_dir: &Path,
) -> Result<()> {
    ensure_dir(out_dir)?;
    let mut manifest = Manifest::new("analyze");
    let net = load_inputs(edges, locations, metric, &mut manifest)?;
    manifest.push("sample_size", sample_size);
    manifest.push("seed", seed);

    let started = Instant::now();
    let report = locality_report(&net, sample_size, seed)?;
    manifest.push_duration("phase_analyze_ms", started.elapsed());
    manifest.push("tvd", report.tvd);
    manifest.push("inflection_km", report.inflection_km);
    manifest.push("sigma_km", report.sigma_km);
    manifest.push("suitable", report.suitable);
    write_locality_files(out_dir, &report)?;
    manifest.write(&out_dir.join("manifest.txt"))?;

    println!("tvd={:.4}", report.tvd);
    println!("inflection_km={:.4}", report.inflection_km);
    println!("sigma_km={:.4}", report.sigma_km);
    println!(
        "suitable={} (threshold tvd > {})",
        report.suitable,
        crate::locality::SUITABILITY_THRESHOLD
    );
    if report.sigma_km == 0.0 {
        println!("note: all locations coincide; distance weights degenerate to 1");
    }
    Ok(())
}

#[derive(Serialize)]
struct DetectSummary {
    variant: String,
    nodes: usize,
    edges: usize,
    sigma_km: Option<f64>,
    omega: f64,
    tau: f64,
    community_count: usize,
    merges: usize,
    q_initial: f64,
    q_final: f64,
    detect_ms: f64,
}

/// Detect communities and write partition, dendrogram, summary, manifest.
#[allow(clippy::too_many_arguments)]
pub fn cmd_detect(
    edges: &Path,
    locations: &Path,
    metric: Metric,
    variant: Variant,
    sample_size: usize,
    seed: u64,
    threads: usize,
    out_dir: &Path,
) -> Result<()> {
    ensure_dir(out_dir)?;
    let mut manifest = Manifest::new("detect");
    let net = load_inputs(edges, locations, metric, &mut manifest)?;
    manifest.push("variant", variant);
    manifest.push("sample_size", sample_size);
    manifest.push("seed", seed);
    manifest.push("threads", threads.max(1));

    let started = Instant::now();
    let ctx = build_context(&net, variant, sample_size, seed)?;
    manifest.push_duration("phase_context_ms", started.elapsed());
    if variant != Variant::Baseline {
        manifest.push("sigma_km", ctx.sigma_km());
    }
    manifest.push("omega", ctx.omega());
    manifest.push("tau", ctx.tau());

    let started = Instant::now();
    let dendrogram = detect_with_context(&net, &ctx, EngineOptions::default());
    let detect_elapsed = started.elapsed();
    manifest.push_duration("phase_detect_ms", detect_elapsed);
    manifest.push("merges", dendrogram.merges.len());
    manifest.push("community_count", dendrogram.partition.community_count());
    manifest.push("q_final", dendrogram.final_q());

    let started = Instant::now();
    write_partition(&out_dir.join("partition.tsv"), &net, &dendrogram.partition)?;
    write_dendrogram_csv(&out_dir.join("dendrogram.csv"), &dendrogram)?;
    let summary = DetectSummary {
        variant: variant.name().to_string(),
        nodes: net.node_count(),
        edges: net.edge_count(),
        sigma_km: (variant != Variant::Baseline).then(|| ctx.sigma_km()),
        omega: ctx.omega(),
        tau: ctx.tau(),
        community_count: dendrogram.partition.community_count(),
        merges: dendrogram.merges.len(),
        q_initial: dendrogram.q_initial,
        q_final: dendrogram.final_q(),
        detect_ms: detect_elapsed.as_secs_f64() * 1000.0,
    };
    serde_json::to_writer_pretty(
        std::io::BufWriter::new(std::fs::File::create(out_dir.join("summary.json"))?),
        &summary,
    )
    .map_err(std::io::Error::other)?;
    manifest.push_duration("phase_write_ms", started.elapsed());
    manifest.write(&out_dir.join("manifest.txt"))?;

    println!(
        "{} communities after {} merges, Q={:.6} ({:.1} ms)",
        dendrogram.partition.community_count(),
        dendrogram.merges.len(),
        dendrogram.final_q(),
        detect_elapsed.as_secs_f64() * 1000.0
    );
    Ok(())
}

#[derive(Serialize)]
struct EvaluateSummary {
    community_count: usize,
    accuracy: Option<f64>,
    mean_span_km: f64,
    mean_internal_degree: f64,
    size_profile: Vec<SizeBucket>,
}

/// Score a partition file against the network, and against ground-truth
/// labels when provided.
pub fn cmd_evaluate(
    partition_path: &Path,
    edges: &Path,
    locations: &Path,
    labels_path: Option<&Path>,
    metric: Metric,
    out_dir: &Path,
) -> Result<()> {
    ensure_dir(out_dir)?;
    let mut manifest = Manifest::new("evaluate");
    let net = load_inputs(edges, locations, metric, &mut manifest)?;
    manifest.push("partition", partition_path.display());

    let partition = crate::io::read_partition(partition_path, &net)?;
    let started = Instant::now();
    let scores = score_partition(&net, &partition)?;
    let profile = size_profile(&net, &partition)?;
    let acc = match labels_path {
        Some(path) => {
            manifest.push("labels", path.display());
            let truth = crate::io::read_labels(path, &net)?;
            Some(accuracy(&partition, &truth)?)
        }
        None => None,
    };
    manifest.push_duration("phase_evaluate_ms", started.elapsed());

    let mean_span = scores.iter().map(|s| s.span_km).sum::<f64>() / scores.len().max(1) as f64;
    let mean_deg =
        scores.iter().map(|s| s.avg_internal_degree).sum::<f64>() / scores.len().max(1) as f64;
    manifest.push("community_count", partition.community_count());
    manifest.push("mean_span_km", mean_span);
    manifest.push("mean_internal_degree", mean_deg);
    if let Some(a) = acc {
        manifest.push("accuracy", a);
    }

    write_scores_csv(&out_dir.join("scores.csv"), &scores)?;
    let summary = EvaluateSummary {
        community_count: partition.community_count(),
        accuracy: acc,
        mean_span_km: mean_span,
        mean_internal_degree: mean_deg,
        size_profile: profile,
    };
    serde_json::to_writer_pretty(
        std::io::BufWriter::new(std::fs::File::create(out_dir.join("summary.json"))?),
        &summary,
    )
    .map_err(std::io::Error::other)?;
    manifest.write(&out_dir.join("manifest.txt"))?;

    println!("communities={}", partition.community_count());
    println!("mean_span_km={mean_span:.4}");
    println!("mean_internal_degree={mean_deg:.4}");
    match acc {
        Some(a) => println!("accuracy={a:.2}"),
        None => println!("accuracy=n/a (no labels file)"),
    }
    Ok(())
}

/// Generate-and-detect timing sweep over network sizes. Writes
/// `timings.csv`, a partition per size, and the manifest; prints a table.
#[allow(clippy::too_many_arguments)]
pub fn cmd_benchmark(
    sizes: &[u32],
    variant: Variant,
    omega: f64,
    target_avg_degree: f64,
    label_count: u32,
    sample_size: usize,
    seed: u64,
    threads: usize,
    out_dir: &Path,
) -> Result<()> {
    ensure_dir(out_dir)?;
    let mut manifest = Manifest::new("benchmark");
    manifest.push(
        "sizes",
        sizes
            .iter()
            .map(|s| s.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    manifest.push("variant", variant);
    manifest.push("omega", omega);
    manifest.push("target_avg_degree", target_avg_degree);
    manifest.push("label_count", label_count);
    manifest.push("sample_size", sample_size);
    manifest.push("seed", seed);
    manifest.push("threads", threads.max(1));

    let timings_path = out_dir.join("timings.csv");
    let mut rows = Vec::new();
    println!(
        "{:>8} {:>9} {:>12} {:>12} {:>12} {:>11}",
        "n", "m", "generate_ms", "detect_ms", "total_ms", "communities"
    );
    for &size in sizes {
        let cfg = SynthConfig {
            omega,
            target_avg_degree,
            label_count,
            seed,
            ..SynthConfig::with_node_count(size)
        };
        let started = Instant::now();
        let synth = generate(&cfg)?;
        let generate_ms = started.elapsed().as_secs_f64() * 1000.0;

        let started = Instant::now();
        let ctx = build_context(&synth.network, variant, sample_size, seed)?;
        let dendrogram = detect_with_context(&synth.network, &ctx, EngineOptions::default());
        let detect_ms = started.elapsed().as_secs_f64() * 1000.0;

        write_partition(
            &out_dir.join(format!("partition_{size}.tsv")),
            &synth.network,
            &dendrogram.partition,
        )?;
        let total_ms = generate_ms + detect_ms;
        println!(
            "{:>8} {:>9} {:>12.1} {:>12.1} {:>12.1} {:>11}",
            synth.network.node_count(),
            synth.network.edge_count(),
            generate_ms,
            detect_ms,
            total_ms,
            dendrogram.partition.community_count()
        );
        manifest.push(&format!("detect_ms_{size}"), format!("{detect_ms:.3}"));
        rows.push((
            synth.network.node_count(),
            synth.network.edge_count(),
            generate_ms,
            detect_ms,
            total_ms,
            dendrogram.partition.community_count(),
        ));
    }
    let mut w = std::io::BufWriter::new(std::fs::File::create(&timings_path)?);
    use std::io::Write;
    writeln!(w, "n,m,generate_ms,detect_ms,total_ms,communities")?;
    for (n, m, g, d, t, c) in &rows {
        writeln!(w, "{n},{m},{g:.3},{d:.3},{t:.3},{c}")?;
    }
    w.flush()?;
    manifest.write(&out_dir.join("manifest.txt"))?;
    Ok(())
}

/// Parse an omega flag value: a positive number or `inf`.
pub fn parse_omega(s: &str) -> std::result::Result<f64, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|e| e.to_string())
            .and_then(|v| {
                if v > 0.0 {
                    Ok(v)
                } else {
                    Err("omega must be positive".into())
                }
            }),
    }
}

/// Build and score a random baseline partition for comparison runs.
pub fn random_baseline_scores(
    net: &Network,
    community_count: u32,
    seed: u64,
) -> Result<(Partition, Vec<crate::metrics::CommunityScore>)> {
    let p = random_partition(net, community_count, seed);
    let scores = score_partition(net, &p)?;
    Ok((p, scores))
}

pub use crate::io::Manifest as RunManifest;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_parsing() {
        assert_eq!(parse_omega("3").unwrap(), 3.0);
        assert_eq!(parse_omega("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_omega("+INF").unwrap(), f64::INFINITY);
        assert!(parse_omega("0").is_err());
        assert!(parse_omega("x").is_err());
    }

    #[test]
    fn generate_then_detect_then_evaluate_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let data = dir.path().join("data");
        let cfg = SynthConfig {
            grid_side: 10,
            node_count: 100,
            label_count: 4,
            target_avg_degree: 8.0,
            seed: 7,
            ..SynthConfig::default()
        };
        cmd_generate(&cfg, &data).unwrap();

        let run = dir.path().join("run");
        cmd_detect(
            &data.join("edges.tsv"),
            &data.join("locations.tsv"),
            Metric::PlanarEuclidean,
            Variant::Locality,
            100_000,
            7,
            1,
            &run,
        )
        .unwrap();

        let eval = dir.path().join("eval");
        cmd_evaluate(
            &run.join("partition.tsv"),
            &data.join("edges.tsv"),
            &data.join("locations.tsv"),
            Some(&data.join("labels.tsv")),
            Metric::PlanarEuclidean,
            &eval,
        )
        .unwrap();

        for file in ["scores.csv", "summary.json", "manifest.txt"] {
            assert!(eval.join(file).exists(), "{file} missing");
        }
        let summary = std::fs::read_to_string(eval.join("summary.json")).unwrap();
        let json: serde_json::Value = serde_json::from_str(&summary).unwrap();
        assert!(json["accuracy"].is_number());
    }
}

//! Readers and writers for the on-disk formats: TSV edge/location/label
//! files, partition files, dendrogram and score CSVs, locality reports, and
//! run manifests. All text is UTF-8; `#` starts a comment line in TSV
//! inputs.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::engine::Dendrogram;
use crate::error::{Error, Result};
use crate::graph::Network;
use crate::locality::LocalityReport;
use crate::metrics::CommunityScore;
use crate::modularity::Partition;
use crate::synth::{SynthConfig, SynthNetwork};

fn config_header(cfg: &SynthConfig) -> String {
    format!(
        "# grid_side={}\n# node_count={}\n# label_count={}\n# omega={}\n# p_same={}\n# p_diff={}\n# target_avg_degree={}\n# seed={}\n",
        cfg.grid_side,
        cfg.node_count,
        cfg.label_count,
        cfg.omega,
        cfg.p_same,
        cfg.p_diff,
        cfg.target_avg_degree,
        cfg.seed
    )
}

/// Write `edges.tsv`, `locations.tsv`, and `labels.tsv` for a generated
/// network, each with the generator config echoed as a comment header.
/// Returns the three paths.
pub fn write_synth_files(
    dir: &Path,
    synth: &SynthNetwork,
    cfg: &SynthConfig,
) -> Result<[PathBuf; 3]> {
    std::fs::create_dir_all(dir)?;
    let header = config_header(cfg);
    let net = &synth.network;

    let edges_path = dir.join("edges.tsv");
    let mut w = BufWriter::new(File::create(&edges_path)?);
    w.write_all(header.as_bytes())?;
    for &(u, v) in net.edges() {
        writeln!(w, "{}\t{}", net.id(u), net.id(v))?;
    }
    w.flush()?;

    let locations_path = dir.join("locations.tsv");
    let mut w = BufWriter::new(File::create(&locations_path)?);
    w.write_all(header.as_bytes())?;
    for v in 0..net.node_count() as u32 {
        let p = net.point(v);
        writeln!(w, "{}\t{}\t{}", net.id(v), p.x, p.y)?;
    }
    w.flush()?;

    let labels_path = dir.join("labels.tsv");
    let mut w = BufWriter::new(File::create(&labels_path)?);
    w.write_all(header.as_bytes())?;
    for v in 0..net.node_count() as u32 {
        writeln!(w, "{}\t{}", net.id(v), synth.true_labels[v as usize])?;
    }
    w.flush()?;

    Ok([edges_path, locations_path, labels_path])
}

/// Read a `<id>\t<label>` ground-truth file into per-node labels.
pub fn read_labels(path: &Path, net: &Network) -> Result<Vec<u32>> {
    let mut labels: Vec<Option<u32>> = vec![None; net.node_count()];
    for (lineno, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let (id, value) = match (fields.next(), fields.next(), fields.next()) {
            (Some(id), Some(value), None) => (id, value),
            _ => {
                return Err(Error::Parse {
                    path: path.into(),
                    line: lineno + 1,
                    message: "expected <id>\\t<label>".into(),
                })
            }
        };
        let v = net.node_index(id).ok_or_else(|| Error::Parse {
            path: path.into(),
            line: lineno + 1,
            message: format!("unknown node id {id:?}"),
        })?;
        let label: u32 = value.trim().parse().map_err(|_| Error::Parse {
            path: path.into(),
            line: lineno + 1,
            message: format!("bad label {value:?}"),
        })?;
        labels[v as usize] = Some(label);
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(v, l)| {
            l.ok_or_else(|| Error::Parse {
                path: path.into(),
                line: 0,
                message: format!("node {:?} has no label row", net.id(v as u32)),
            })
        })
        .collect()
}

/// Write a partition as `<node id>\t<community id>` rows.
pub fn write_partition(path: &Path, net: &Network, p: &Partition) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for v in 0..net.node_count() as u32 {
        writeln!(w, "{}\t{}", net.id(v), p.label(v))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a partition file back against a loaded network.
pub fn read_partition(path: &Path, net: &Network) -> Result<Partition> {
    let raw = read_labels(path, net)?;
    Ok(Partition::from_labels(&raw))
}

/// Dendrogram CSV: `step,i,j,deltaQ,Q`.
pub fn write_dendrogram_csv(path: &Path, d: &Dendrogram) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "step,i,j,deltaQ,Q")?;
    for r in &d.merges {
        writeln!(w, "{},{},{},{},{}", r.step, r.a, r.b, r.delta_q, r.q_after)?;
    }
    w.flush()?;
    Ok(())
}

/// Scores CSV: `community,size,span_km,avg_internal_degree`.
pub fn write_scores_csv(path: &Path, scores: &[CommunityScore]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "community,size,span_km,avg_internal_degree")?;
    for s in scores {
        writeln!(
            w,
            "{},{},{},{}",
            s.community, s.size, s.span_km, s.avg_internal_degree
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Write `report.txt` (flat key=value) plus `cdf_all.csv` and
/// `cdf_connected.csv` (grid_km,value) into the directory.
pub fn write_locality_files(dir: &Path, report: &LocalityReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join("report.txt"))?);
    writeln!(w, "tvd={}", report.tvd)?;
    writeln!(w, "inflection_km={}", report.inflection_km)?;
    writeln!(w, "sigma_km={}", report.sigma_km)?;
    writeln!(w, "suitable={}", report.suitable)?;
    writeln!(w, "pair_sample_size={}", report.pair_sample_size)?;
    writeln!(w, "rng_seed={}", report.rng_seed)?;
    w.flush()?;

    for (name, cdf) in [
        ("cdf_all.csv", &report.f_all),
        ("cdf_connected.csv", &report.f_connected),
    ] {
        let mut w = BufWriter::new(File::create(dir.join(name))?);
        writeln!(w, "grid_km,value")?;
        for (g, v) in cdf.grid.iter().zip(&cdf.values) {
            writeln!(w, "{g},{v}")?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Ordered key-value record of a run, written as `key=value` lines.
/// Captures everything needed to reproduce the run.
#[derive(Debug, Clone, Default)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(subcommand: &str) -> Manifest {
        let mut m = Manifest::default();
        m.push("subcommand", subcommand);
        m
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_duration(&mut self, key: &str, elapsed: std::time::Duration) {
        self.push(key, format!("{:.3}", elapsed.as_secs_f64() * 1000.0));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for (k, v) in &self.entries {
            writeln!(w, "{k}={v}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }
}

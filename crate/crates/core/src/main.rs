use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use geocommunity::commands;
use geocommunity::locality::DEFAULT_PAIR_SAMPLE;
use geocommunity::synth::SynthConfig;
use geocommunity::{Metric, Variant};

#[derive(Parser)]
#[command(
    name = "geocommunity",
    version,
    about = "Community detection for location-tagged networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Planar,
    Geodesic,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Metric {
        match m {
            MetricArg::Planar => Metric::PlanarEuclidean,
            MetricArg::Geodesic => Metric::Geodesic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Baseline,
    Locality,
    Similarity,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Baseline => Variant::Baseline,
            VariantArg::Locality => Variant::Locality,
            VariantArg::Similarity => Variant::Similarity,
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Edge file: one "<id_u>\t<id_v>" per line, '#' comments ignored
    #[arg(long)]
    edges: PathBuf,
    /// Location file: "<id>\t<x>\t<y>" per line
    #[arg(long)]
    locations: PathBuf,
    /// Distance metric for the coordinates
    #[arg(long, value_enum, default_value = "planar")]
    metric: MetricArg,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a planted-partition benchmark network
    Generate {
        /// Grid side length; nodes sit on cell centers
        #[arg(long, default_value_t = 50)]
        grid_side: u32,
        /// Number of nodes (defaults to the full grid)
        #[arg(long)]
        nodes: Option<u32>,
        /// Number of planted community labels
        #[arg(long, default_value_t = 10)]
        labels: u32,
        /// Distance decay scale of edge formation; "inf" removes geography
        #[arg(long, default_value = "3", value_parser = commands::parse_omega)]
        omega: f64,
        /// Edge probability factor for same-label pairs
        #[arg(long, default_value_t = 0.5)]
        p_same: f64,
        /// Edge probability factor for different-label pairs
        #[arg(long, default_value_t = 0.1)]
        p_diff: f64,
        /// Target expected average degree
        #[arg(long, default_value_t = 15.0)]
        avg_degree: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Measure how strongly geography shapes the network
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        /// Cap on sampled node pairs for the all-pairs CDF and sigma
        #[arg(long, default_value_t = DEFAULT_PAIR_SAMPLE)]
        sample_size: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Detect communities by greedy agglomeration
    Detect {
        #[command(flatten)]
        input: InputArgs,
        /// Quality functional to maximize
        #[arg(long, value_enum, default_value = "similarity")]
        variant: VariantArg,
        /// Cap on sampled node pairs when estimating sigma
        #[arg(long, default_value_t = DEFAULT_PAIR_SAMPLE)]
        sample_size: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Worker cap for parallelizable phases
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Score a partition file; accuracy needs a ground-truth label file
    Evaluate {
        /// Partition file: "<node id>\t<community id>" per line
        #[arg(long)]
        partition: PathBuf,
        #[command(flatten)]
        input: InputArgs,
        /// Ground-truth labels "<id>\t<label>" (optional)
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Generate-and-detect timing sweep over network sizes
    Benchmark {
        /// Comma-separated node counts
        #[arg(long, value_delimiter = ',', default_value = "2500,10000,20000")]
        sizes: Vec<u32>,
        #[arg(long, value_enum, default_value = "similarity")]
        variant: VariantArg,
        #[arg(long, default_value = "3", value_parser = commands::parse_omega)]
        omega: f64,
        #[arg(long, default_value_t = 15.0)]
        avg_degree: f64,
        #[arg(long, default_value_t = 10)]
        labels: u32,
        #[arg(long, default_value_t = DEFAULT_PAIR_SAMPLE)]
        sample_size: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> geocommunity::Result<()> {
    match cli.command {
        Command::Generate {
            grid_side,
            nodes,
            labels,
            omega,
            p_same,
            p_diff,
            avg_degree,
            seed,
            out,
        } => {
            let cfg = SynthConfig {
                grid_side,
                node_count: nodes.unwrap_or(grid_side * grid_side),
                label_count: labels,
                omega,
                p_same,
                p_diff,
                target_avg_degree: avg_degree,
                seed,
            };
            commands::cmd_generate(&cfg, &out)
        }
        Command::Analyze {
            input,
            sample_size,
            seed,
            out,
        } => commands::cmd_analyze(
            &input.edges,
            &input.locations,
            input.metric.into(),
            sample_size,
            seed,
            &out,
        ),
        Command::Detect {
            input,
            variant,
            sample_size,
            seed,
            threads,
            out,
        } => commands::cmd_detect(
            &input.edges,
            &input.locations,
            input.metric.into(),
            variant.into(),
            sample_size,
            seed,
            threads,
            &out,
        ),
        Command::Evaluate {
            partition,
            input,
            labels,
            out,
        } => commands::cmd_evaluate(
            &partition,
            &input.edges,
            &input.locations,
            labels.as_deref(),
            input.metric.into(),
            &out,
        ),
        Command::Benchmark {
            sizes,
            variant,
            omega,
            avg_degree,
            labels,
            sample_size,
            seed,
            threads,
            out,
        } => commands::cmd_benchmark(
            &sizes,
            variant.into(),
            omega,
            avg_degree,
            labels,
            sample_size,
            seed,
            threads,
            &out,
        ),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

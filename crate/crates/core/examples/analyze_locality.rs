//! Decide whether a network is a good fit for location-aware detection by
//! comparing the distance CDF of connected pairs against all pairs.
//!
//! Run with: cargo run --example analyze_locality

use geocommunity::locality::{locality_report, DEFAULT_PAIR_SAMPLE, SUITABILITY_THRESHOLD};
use geocommunity::synth::{generate, SynthConfig};

fn main() -> geocommunity::Result<()> {
    for (name, omega) in [("geography-driven", 3.0), ("geography-free", f64::INFINITY)] {
        let cfg = SynthConfig {
            omega,
            seed: 3,
            ..SynthConfig::default()
        };
        let synth = generate(&cfg)?;
        let report = locality_report(&synth.network, DEFAULT_PAIR_SAMPLE, 1)?;
        println!("{name} network (omega = {omega}):");
        println!("  tvd            = {:.4}", report.tvd);
        println!("  inflection     = {:.2} km", report.inflection_km);
        println!(
            "  sigma          = {:.2} km (mean pair distance)",
            report.sigma_km
        );
        println!("  pairs sampled  = {}", report.pair_sample_size);
        println!(
            "  verdict        = {} (location-aware detection {} here)\n",
            report.suitable,
            if report.suitable {
                "is worthwhile"
            } else {
                "buys nothing"
            }
        );
    }
    println!(
        "rule of thumb: run the locality or similarity variant when tvd > {SUITABILITY_THRESHOLD}"
    );
    Ok(())
}

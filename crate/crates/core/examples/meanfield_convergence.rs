//! Exact N-boson dynamics approaching the Hartree orbital as N grows.
//!
//! Usage: `cargo run --release --example meanfield_convergence -- [g_total] [t]`

use nslab::meanfield::{convergence_experiment, ConvergenceParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut params = ConvergenceParams::default();
    if let Some(g) = args.first() {
        params.g_total = g.parse()?;
    }
    if let Some(t) = args.get(1) {
        params.t = t.parse()?;
    }
    let report = convergence_experiment(&params)?;
    println!("{:>3} {:>14} {:>10}", "N", "trace_dist", "wall_ms");
    for (&(n, d), &(_, ms)) in report.final_distances.iter().zip(&report.wall_ms) {
        println!("{n:>3} {d:>14.6e} {ms:>10.1}");
    }
    if let Some(fit) = report.fit {
        println!("fitted exponent {:.3}, spearman {:.3}", fit.exponent, report.spearman);
    }
    Ok(())
}

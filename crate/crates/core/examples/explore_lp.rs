//! Searches structured candidates for solutions of the phase equation under l^p norms.
//! Usage: `cargo run --example explore_lp -- [p] [dim]`.

use wigner_check::explore::{explore_p1, ExploreConfig, Problem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(Ok(1.0), |s| s.parse())?;
    let dim: usize = args.next().map_or(Ok(3), |s| s.parse())?;
    let report = explore_p1(&ExploreConfig::new(Problem::P1 { p }, dim, 5, 2024, 1e-9))?;
    println!("{}", report.evidence);
    for c in &report.candidates {
        println!("{:<32} {:>10.3e} {:?}", c.label, c.max_residual, c.classification);
    }
    println!("verdict: {:?}", report.verdict);
    Ok(())
}

//! Runs the condition battery on a linear isometry, a phase isometry with
//! pseudo-random signs and a scaled violator, then checks the implication
//! chain on each.

use wigner_check::checker::{implication_chain, run_battery, Battery};
use wigner_check::maps::{random_orthogonal, MapSpec, SignRule};
use wigner_check::space::{Field, SamplePlan, SpaceSpec};

fn show(name: &str, b: &Battery) {
    println!("{name} ({} samples)", b.samples);
    for r in &b.reports {
        println!("  {:<16} {:>10.3e}  {}", r.condition.to_string(), r.max_residual, if r.pass { "pass" } else { "FAIL" });
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let plan = SamplePlan::gaussian(60, 7);
    let q = random_orthogonal(4, 7);
    let maps = [
        ("linear isometry", MapSpec::linear_isometry(Field::Real, q.clone())?),
        ("phase isometry", MapSpec::phase_isometry(Field::Real, q, SignRule::Seeded { seed: 3 })?),
        ("scaled by 1.1", MapSpec::scaled(MapSpec::identity(&SpaceSpec::real(4)), 1.1)?),
    ];
    for (name, m) in &maps {
        let b = run_battery(m, &plan, 1e-9)?;
        show(name, &b);
        let xs = wigner_check::checker::battery_samples(m, &plan)?;
        let fxs = xs.iter().map(|x| m.eval(x)).collect::<Result<Vec<_>, _>>()?;
        let broken = implication_chain(&xs, &fxs, 1e-9)?.iter().filter(|o| !o.holds()).count();
        println!("  implication counterexamples: {broken}");
    }
    Ok(())
}

//! Recovers the linear part and the signs of a phase isometry from a table
//! of samples and images, and compares the signs with the generating rule.

use wigner_check::maps::{random_orthogonal, tabulate, MapSpec, SignRule};
use wigner_check::recover::{recover, RecoverOptions};
use wigner_check::space::{sample, Field, SamplePlan, SpaceSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dim = 5;
    let q = random_orthogonal(dim, 11);
    let rule = SignRule::Seeded { seed: 99 };
    let m = MapSpec::phase_isometry(Field::Real, q.clone(), rule.clone())?;
    let xs = sample(&SamplePlan::gaussian(100, 4), &SpaceSpec::real(dim))?;
    let table = tabulate(&m, &xs)?;

    let r = recover(&table, &RecoverOptions::default())?;
    println!("components: {}", r.components);
    println!("gram residual {:.2e}, fit residual {:.2e}, certified {}", r.gram_residual, r.fit_residual, r.certified);

    // one global flip relates the recovered signs to the true ones
    let truth: Vec<i8> = xs.iter().map(|x| if rule.phase(x).re > 0.0 { 1 } else { -1 }).collect();
    let flip = truth[0] * r.signs[0];
    let agree = truth.iter().zip(&r.signs).all(|(t, s)| *t == flip * s);
    println!("signs match up to a global flip: {agree}");
    println!("|G - flip * Q| = {:.2e}", (&r.g - q.scale(f64::from(flip))).abs().max());
    Ok(())
}

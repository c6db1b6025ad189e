//! f(t a) = |t| b on a line: it solves the equation but is not phase
//! equivalent to a linear map through one global sign. Recovery with the
//! local edge rule splits the line into its two rays.

use wigner_check::checker::{run_battery, ConditionId};
use wigner_check::maps::{tabulate, MapSpec};
use wigner_check::recover::{recover, EdgeRule, GraphOptions, RecoverOptions};
use wigner_check::space::{SamplePlan, Vector};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let a = Vector::real(vec![1.0]);
    let b = Vector::real(vec![0.6, 0.8]);
    let m = MapSpec::abs_one_dim(a.clone(), b)?;
    let plan = SamplePlan::gaussian(30, 5);

    let battery = run_battery(&m, &plan, 1e-9)?;
    for id in [ConditionId::T2I, ConditionId::T2II, ConditionId::T2III, ConditionId::T2IV, ConditionId::T1I] {
        let r = battery.get(id).expect("pair condition");
        println!("{:<6} {:>10.3e} {}", id.to_string(), r.max_residual, if r.pass { "pass" } else { "FAIL" });
    }

    let xs = wigner_check::checker::battery_samples(&m, &plan)?;
    let table = tabulate(&m, &xs)?;
    let opts = RecoverOptions { graph: GraphOptions { rule: EdgeRule::Local, ..Default::default() }, ..Default::default() };
    let r = recover(&table, &opts)?;
    println!("components: {}, certified: {}", r.components, r.certified);
    for (x, s) in xs.iter().zip(&r.signs).take(8) {
        println!("  t = {:>7.3}  sign {:+}", x.real_coords()[0], s);
    }
    Ok(())
}

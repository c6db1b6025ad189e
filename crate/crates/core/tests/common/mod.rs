#![allow(dead_code)]

use wigner_check::checker::battery_samples;
use wigner_check::maps::{random_orthogonal, random_unitary, MapSpec, SignRule};
use wigner_check::space::{Field, SamplePlan, SpaceSpec, Vector};

pub struct Fixture {
    pub name: String,
    pub map: MapSpec,
    pub xs: Vec<Vector>,
    pub fxs: Vec<Vector>,
    /// Whether the map solves the phase equation.
    pub solution: bool,
}

impl Fixture {
    pub fn new(name: impl Into<String>, map: MapSpec, samples: usize, seed: u64, solution: bool) -> Self {
        let xs = battery_samples(&map, &SamplePlan::gaussian(samples, seed)).unwrap();
        let fxs = xs.iter().map(|x| map.eval(x).unwrap()).collect();
        Fixture { name: name.into(), map, xs, fxs, solution }
    }
}

pub fn halfspace(field: Field, dim: usize, seed: u64) -> SignRule {
    let s = SpaceSpec::new(field, dim, wigner_check::space::Norm::Euclidean).unwrap();
    let v = wigner_check::space::sample(&SamplePlan::gaussian(1, seed), &s).unwrap().remove(0);
    SignRule::Halfspace { v }
}

/// Solutions and violators over real and complex spaces.
pub fn corpus() -> Vec<Fixture> {
    let mut out = Vec::new();
    for seed in 0..4u64 {
        let dim = 2 + seed as usize;
        let q = random_orthogonal(dim, seed);
        let real = |rule| MapSpec::phase_isometry(Field::Real, q.clone(), rule).unwrap();
        let s = 100 + seed;
        out.push(Fixture::new(format!("linear-{dim}"), MapSpec::linear_isometry(Field::Real, q.clone()).unwrap(), 24, s, true));
        out.push(Fixture::new(format!("phase-const-{dim}"), real(SignRule::Constant { s: -1 }), 24, s, true));
        out.push(Fixture::new(format!("phase-half-{dim}"), real(halfspace(Field::Real, dim, seed)), 24, s, true));
        out.push(Fixture::new(format!("phase-seeded-{dim}"), real(SignRule::Seeded { seed }), 24, s, true));
        let cdim = 1 + seed as usize % 3;
        let u = random_unitary(cdim, seed);
        out.push(Fixture::new(
            format!("unitary-seeded-{cdim}"),
            MapSpec::phase_isometry(Field::Complex, u, SignRule::Seeded { seed }).unwrap(),
            24,
            s,
            true,
        ));
        let id = MapSpec::identity(&SpaceSpec::real(dim));
        out.push(Fixture::new(format!("scaled-1.1-{dim}"), MapSpec::scaled(id.clone(), 1.1).unwrap(), 24, s, false));
        out.push(Fixture::new(format!("scaled-0.9-{dim}"), MapSpec::scaled(real(SignRule::Seeded { seed }), 0.9).unwrap(), 24, s, false));
        out.push(Fixture::new(
            format!("perturbed-{dim}"),
            MapSpec::perturbed_linear(Field::Real, q.clone(), 0.1, seed).unwrap(),
            24,
            s,
            false,
        ));
    }
    out.push(Fixture::new("ratz", MapSpec::RatzConjugation, 24, 7, true));
    let one_dim = MapSpec::abs_one_dim(Vector::real(vec![1.0]), Vector::real(vec![0.6, 0.8])).unwrap();
    out.push(Fixture::new("abs-one-dim", one_dim, 24, 8, true));
    out.push(frustrated_triangle());
    out
}

/// Three unit vectors at 60 degrees whose images keep every `|<<x_i, x_j>>|`
/// but flip the sign of one inner product, so no sign assignment is
/// consistent around the triangle.
pub fn frustrated_triangle() -> Fixture {
    let h = 3f64.sqrt() / 2.0;
    let a = 1.0 / (2.0 * 3f64.sqrt());
    let b = (2.0f64 / 3.0).sqrt();
    let r = |v: &[f64]| Vector::real(v.to_vec());
    let xs = vec![r(&[0.0, 0.0, 0.0]), r(&[1.0, 0.0, 0.0]), r(&[0.5, h, 0.0]), r(&[0.5, a, b])];
    let fxs = vec![r(&[0.0, 0.0, 0.0]), r(&[1.0, 0.0, 0.0]), r(&[0.5, h, 0.0]), r(&[-0.5, h, 0.0])];
    let map = MapSpec::tabulated(xs.iter().cloned().zip(fxs.iter().cloned()).collect()).unwrap();
    Fixture { name: "frustrated-triangle".into(), map, xs, fxs, solution: false }
}

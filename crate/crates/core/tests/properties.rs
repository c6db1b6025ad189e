use proptest::prelude::*;

use wigner_check::checker::{eq22_pair, implication_chain, pair_residual, ConditionId};
use wigner_check::explore::{explore, Classification, ExploreConfig, Problem};
use wigner_check::maps::{random_orthogonal, random_unitary, MapSpec, SignRule};
use wigner_check::space::{
    complexify, norm, real_inner, realify, Field, Norm, Scalar, SpaceSpec, Vector,
};

fn coords(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

/// A space together with two vectors in it.
fn space_pair() -> impl Strategy<Value = (SpaceSpec, Vector, Vector)> {
    (1usize..=6, any::<bool>()).prop_flat_map(|(dim, complex)| {
        let s = if complex { SpaceSpec::complex(dim) } else { SpaceSpec::real(dim) };
        let field = s.field();
        (Just(s), coords(s.real_dim()), coords(s.real_dim())).prop_map(move |(s, a, b)| {
            (s, Vector::from_real_coords(field, a).unwrap(), Vector::from_real_coords(field, b).unwrap())
        })
    })
}

fn rel_close(a: f64, b: f64, rtol: f64, scale: f64) -> bool {
    (a - b).abs() <= rtol * scale.max(1.0)
}

proptest! {
    #[test]
    fn polarization((s, x, y) in space_pair()) {
        let lhs = 2.0 * real_inner(&x, &y, &s).unwrap();
        let (nxy, nx, ny) = (norm(&(&x + &y), &s).unwrap(), norm(&x, &s).unwrap(), norm(&y, &s).unwrap());
        let rhs = nxy * nxy - nx * nx - ny * ny;
        prop_assert!(rel_close(lhs, rhs, 1e-10, nxy * nxy + nx * nx + ny * ny), "{lhs} vs {rhs}");
    }

    #[test]
    fn parallelogram((s, x, y) in space_pair()) {
        let n = |v: &Vector| norm(v, &s).unwrap().powi(2);
        let lhs = n(&(&x + &y)) + n(&(&x - &y));
        let rhs = 2.0 * n(&x) + 2.0 * n(&y);
        prop_assert!(rel_close(lhs, rhs, 1e-10, rhs));
    }

    #[test]
    fn realify_is_an_isometric_isomorphism(a in coords(6), b in coords(6)) {
        let c = SpaceSpec::complex(3);
        let r = SpaceSpec::real(6);
        let x = Vector::from_real_coords(Field::Complex, a).unwrap();
        let y = Vector::from_real_coords(Field::Complex, b).unwrap();
        let (rx, ry) = (realify(&x).unwrap(), realify(&y).unwrap());
        prop_assert!((real_inner(&x, &y, &c).unwrap() - real_inner(&rx, &ry, &r).unwrap()).abs() <= 1e-12);
        prop_assert!((norm(&x, &c).unwrap() - norm(&rx, &r).unwrap()).abs() <= 1e-12);
        prop_assert_eq!(complexify(&rx).unwrap(), x);
    }

    #[test]
    fn phase_isometry_sum_and_difference(
        dim in 1usize..=6,
        q_seed in any::<u64>(),
        rule_seed in any::<u64>(),
        a in coords(6),
        b in coords(6),
    ) {
        let rule = SignRule::Seeded { seed: rule_seed };
        let m = MapSpec::phase_isometry(Field::Real, random_orthogonal(dim, q_seed), rule.clone()).unwrap();
        let x = Vector::real(a[..dim].to_vec());
        let y = Vector::real(b[..dim].to_vec());
        let (fx, fy) = (m.eval(&x).unwrap(), m.eval(&y).unwrap());
        let e = (rule.phase(&x) * rule.phase(&y)).re;
        let ey = y.scale(e);
        for (lhs, rhs) in [
            ((&fx + &fy).euclidean_norm(), (&x + &ey).euclidean_norm()),
            ((&fx - &fy).euclidean_norm(), (&x - &ey).euclidean_norm()),
        ] {
            prop_assert!(rel_close(lhs, rhs, 1e-12, rhs));
        }
    }

    #[test]
    fn ratz_is_real_linear_not_complex_homogeneous(a in coords(4), b in coords(4), t in -5.0f64..5.0) {
        let m = MapSpec::RatzConjugation;
        let x = Vector::from_real_coords(Field::Complex, a).unwrap();
        let y = Vector::from_real_coords(Field::Complex, b).unwrap();
        let f = |v: &Vector| m.eval(v).unwrap();
        prop_assert!((&(&f(&(&x + &y)) - &f(&x)) - &f(&y)).euclidean_norm() <= 1e-10);
        prop_assert!((&f(&x.scale(t)) - &f(&x).scale(t)).euclidean_norm() <= 1e-10);
        prop_assert!((f(&x).euclidean_norm() - x.euclidean_norm()).abs() <= 1e-10);
        let i = Scalar::new(0.0, 1.0);
        let gap = (&f(&x.mul_scalar(i).unwrap()) - &f(&x).mul_scalar(i).unwrap()).euclidean_norm();
        prop_assert!((gap - 2.0 * x.entry(1).norm()).abs() <= 1e-10, "{gap}");
    }

    #[test]
    fn scaled_maps_break_norm_preservation(
        c in prop_oneof![0.0f64..=0.9, 1.1f64..3.0],
        dim in 1usize..=5,
        a in coords(5),
    ) {
        prop_assume!(a[..dim].iter().any(|v| v.abs() > 1e-3));
        let m = MapSpec::scaled(MapSpec::identity(&SpaceSpec::real(dim)), c).unwrap();
        let x = Vector::real(a[..dim].to_vec());
        let x = x.scale(1.0 / x.euclidean_norm());
        let r = (m.eval(&x).unwrap().euclidean_norm() - 1.0).abs();
        prop_assert!(r >= 0.1 * (1.0 - 1e-9), "{r}");
    }

    #[test]
    fn eq22_low_orders_match_isometry_and_equation_one(
        q_seed in any::<u64>(),
        rule_seed in any::<u64>(),
        c in 0.5f64..1.5,
        a in coords(3),
        b in coords(3),
    ) {
        prop_assume!(c != 1.0);
        let base = MapSpec::phase_isometry(Field::Real, random_orthogonal(3, q_seed), SignRule::Seeded { seed: rule_seed }).unwrap();
        let m = MapSpec::scaled(base, c).unwrap();
        let (x, y) = (Vector::real(a), Vector::real(b));
        let (fx, fy) = (m.eval(&x).unwrap(), m.eval(&y).unwrap());
        let mu = pair_residual(ConditionId::MuIsometry, &x, &y, &fx, &fy, None).unwrap();
        let t2 = pair_residual(ConditionId::T2I, &x, &y, &fx, &fy, None).unwrap();
        prop_assert!((eq22_pair(Norm::Euclidean, 1, &x, &y, &fx, &fy).unwrap().0 - mu).abs() <= 1e-12);
        prop_assert!((eq22_pair(Norm::Euclidean, 2, &x, &y, &fx, &fy).unwrap().0 - t2).abs() <= 1e-12);
    }

    #[test]
    fn unitary_phase_rules_solve_eq22(n in 1usize..=6, seed in any::<u64>(), a in coords(4), b in coords(4)) {
        let rule = SignRule::RootsOfUnity { n, seed };
        let m = MapSpec::phase_isometry(Field::Complex, random_unitary(2, seed), rule).unwrap();
        let x = Vector::from_real_coords(Field::Complex, a).unwrap();
        let y = Vector::from_real_coords(Field::Complex, b).unwrap();
        let (fx, fy) = (m.eval(&x).unwrap(), m.eval(&y).unwrap());
        let (r, _) = eq22_pair(Norm::Euclidean, n, &x, &y, &fx, &fy).unwrap();
        prop_assert!(r <= 1e-9 * (1.0 + x.euclidean_norm() + y.euclidean_norm()), "{r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn implication_chain_holds(
        dim in 1usize..=4,
        q_seed in any::<u64>(),
        sample_seed in any::<u64>(),
        c in prop_oneof![Just(None), (0.8f64..0.99).prop_map(Some), (1.01f64..1.2).prop_map(Some)],
        eta in prop_oneof![Just(None), (0.01f64..0.3).prop_map(Some)],
    ) {
        let q = random_orthogonal(dim, q_seed);
        let m = match eta {
            Some(eta) => MapSpec::perturbed_linear(Field::Real, q, eta, q_seed).unwrap(),
            None => {
                let phase = MapSpec::phase_isometry(Field::Real, q, SignRule::Seeded { seed: q_seed }).unwrap();
                match c {
                    Some(c) => MapSpec::scaled(phase, c).unwrap(),
                    None => phase,
                }
            }
        };
        let xs = wigner_check::checker::battery_samples(&m, &wigner_check::space::SamplePlan::gaussian(12, sample_seed)).unwrap();
        let fxs: Vec<Vector> = xs.iter().map(|x| m.eval(x).unwrap()).collect();
        for o in implication_chain(&xs, &fxs, 1e-9).unwrap() {
            prop_assert!(o.holds(), "{} => {}", o.premise, o.conclusion);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn explore_verdicts_are_monotone_in_tol(seed in any::<u64>(), p2 in any::<bool>(), k in 1.0f64..1e6) {
        let problem = if p2 { Problem::P2 { n: 3 } } else { Problem::P1 { p: 1.5 } };
        let tight = ExploreConfig { pairs: 20, ..ExploreConfig::new(problem, 2, 1, seed, 1e-9) };
        let loose = ExploreConfig { tol: 1e-9 * k, ..tight.clone() };
        let (a, b) = (explore(&tight).unwrap(), explore(&loose).unwrap());
        for (x, y) in a.candidates.iter().zip(&b.candidates) {
            prop_assert_eq!(x.max_residual.to_bits(), y.max_residual.to_bits());
            if x.classification == Classification::Solution {
                prop_assert_eq!(y.classification, Classification::Solution);
            }
        }
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&explore(&tight).unwrap()).unwrap());
    }
}

#[test]
fn l1_breaks_the_parallelogram_law() {
    let s = SpaceSpec::pnorm(2, 1.0).unwrap();
    let (e1, e2) = (Vector::real(vec![1.0, 0.0]), Vector::real(vec![0.0, 1.0]));
    let n = |v: &Vector| norm(v, &s).unwrap().powi(2);
    let gap = (n(&(&e1 + &e2)) + n(&(&e1 - &e2)) - 2.0 * n(&e1) - 2.0 * n(&e2)).abs();
    assert!(gap >= 0.01, "{gap}");
}

mod common;

use common::*;
use elliptic_core::lattice::{LatticePair, LatticeSpec, RootSelector};
use elliptic_core::{BiquadraticCurve, Polynomial, Scalar};
use proptest::prelude::*;

fn scalar() -> impl Strategy<Value = Scalar> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Scalar::new(a, b))
}

fn spaced_roots(n: usize) -> impl Strategy<Value = Vec<Scalar>> {
    prop::collection::vec(scalar(), n).prop_filter("roots well separated", |r| {
        r.iter().enumerate().all(|(i, a)| r[..i].iter().all(|b| (a - b).norm() > 0.1))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn roots_rebuild_polynomial(roots in spaced_roots(5), lead in scalar()) {
        prop_assume!(lead.norm() > 0.1);
        let p = Polynomial::from_roots(lead, &roots);
        let found = p.roots().unwrap();
        prop_assert_eq!(found.len(), 5);
        let q = Polynomial::from_roots(lead, &found);
        for k in 0..=5 {
            prop_assert!((p.coeff(k) - q.coeff(k)).norm() <= 1e-8 * (1.0 + p.coeff(k).norm()));
        }
    }

    #[test]
    fn eval_is_multiplicative(a in prop::collection::vec(scalar(), 1..5), b in prop::collection::vec(scalar(), 1..5), z in scalar()) {
        let (p, q) = (Polynomial::new(a), Polynomial::new(b));
        let lhs = (&p * &q).eval(z);
        let rhs = p.eval(z) * q.eval(z);
        let scale = p.abs_scale_at(z) * q.abs_scale_at(z);
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn vieta_sum_and_product(g in prop::array::uniform3(prop::array::uniform3(-2.0..2.0f64)), x in scalar()) {
        let Ok(curve) = BiquadraticCurve::from_real(g) else { return Ok(()) };
        let (x0, x1, x2) = (curve.x_view()[0].eval(x), curve.x_view()[1].eval(x), curve.x2(x));
        prop_assume!(x2.norm() > 1e-3);
        let r = curve.y_roots(x, None).unwrap();
        let tol = 1e-9 * (1.0 + (x1 / x2).norm() + (x0 / x2).norm());
        prop_assert!((r.first + r.second + x1 / x2).norm() <= tol);
        prop_assert!((r.first * r.second - x0 / x2).norm() <= tol);
    }

    #[test]
    fn lattice_steps_reverse(seed in 0u64..500, k in 1usize..=20) {
        let curve = random_curve(seed);
        let Ok(spec) = LatticeSpec::select(curve, c(0.31, -0.17), RootSelector::ByIndex(0)) else { return Ok(()) };
        let mut lat = LatticePair::new(spec);
        let start = lat.point(0).unwrap();
        let mut ok = true;
        for _ in 0..k {
            ok &= lat.step_forward().is_ok();
        }
        prop_assume!(ok);
        let mut back = LatticePair::new(LatticeSpec::new(lat.curve().clone(), lat.x(k as i64).unwrap(), lat.y(k as i64).unwrap()).unwrap());
        for _ in 0..k {
            back.step_backward().unwrap();
        }
        let (x, y) = back.point(-(k as i64)).unwrap();
        let tol = 1e-8 * (1.0 + start.0.norm() + start.1.norm());
        prop_assert!((x - start.0).norm() <= tol && (y - start.1).norm() <= tol);
    }
}

#[test]
fn random_curves_stay_on_curve() {
    for seed in 0..20 {
        let curve = random_curve(seed);
        let spec = LatticeSpec::select(curve, c(0.37, 0.21), RootSelector::ByIndex(0)).unwrap();
        match LatticePair::generate(spec, -40, 40) {
            Ok(lat) => assert!(lat.max_residual() <= 1e-9, "seed {seed}: {}", lat.max_residual()),
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
}

#[test]
fn askey_wilson_fit_recovers_lattice() {
    let o = aw_oracle();
    let lat = LatticePair::generate(o.spec().unwrap(), -10, 10).unwrap();
    for n in -10..=10 {
        let (x, y) = lat.point(n).unwrap();
        let (cx, cy) = o.point(n);
        assert!(rel(x, cx) <= 1e-9 && rel(y, cy) <= 1e-9, "n = {n}");
    }
}

#[test]
fn curve_json_round_trip() {
    let curve = generic_curve();
    let text = serde_json::to_string(&curve).unwrap();
    let back: BiquadraticCurve = serde_json::from_str(&text).unwrap();
    assert_eq!(curve, back);
}

#[test]
fn branch_point_roots_coincide() {
    let curve = linear_curve();
    // P is constant for the linear curve, so no branch points; the circle curve has one at 0
    assert_eq!(curve.discriminant_p().degree(), 0);
    let circle = circle_curve(0.2);
    let r = circle.y_roots(c(0.0, 0.0), None).unwrap();
    assert!(circle.is_branch_point(&r));
}

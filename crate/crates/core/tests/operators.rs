mod common;

use common::*;
use elliptic_core::diffops::{apply_d_pointwise, apply_d_rational, apply_m_pointwise, CnMethod, DnPoint};
use elliptic_core::poly::RationalFunction;
use elliptic_core::{re, Polynomial, Scalar};

#[test]
fn divided_difference_of_polynomial_lowers_degree() {
    let curve = generic_curve();
    let f = RationalFunction::from_polynomial(Polynomial::from_real(&[1.0, -2.0, 0.5, 3.0]));
    let df = apply_d_rational(&curve, &f).unwrap();
    for x in [c(0.2, 0.3), c(-1.1, 0.4), c(2.0, -0.7)] {
        let direct = apply_d_pointwise(&curve, |y| f.eval(y), x).unwrap();
        assert!(rel(df.eval(x).unwrap(), direct) <= 1e-10);
    }
}

#[test]
fn mean_of_constant_is_constant() {
    let curve = aw_curve();
    let m = apply_m_pointwise(&curve, |_| Ok(c(2.5, -1.0)), c(0.4, 0.9)).unwrap();
    assert!(rel(m, c(2.5, -1.0)) <= 1e-15);
}

#[test]
fn d_of_identity_is_one() {
    for (_, pair) in fixture_pairs(1) {
        let v = apply_d_pointwise(pair.curve(), Ok, c(0.7, -0.2)).unwrap();
        assert!(rel(v, re(1.0)) <= 1e-14);
    }
}

#[test]
fn simple_pole_on_every_fixture() {
    for (name, pair) in fixture_pairs(2) {
        let curve = pair.curve();
        let a = c(1.9, 1.3);
        let sym = apply_d_rational(curve, &RationalFunction::simple_pole(a)).unwrap();
        for x in samples(&pair, 0.2, 1.5, 12, 3) {
            let direct = apply_d_pointwise(curve, |y| Ok(1.0 / (y - a)), x).unwrap();
            assert!(rel(sym.eval(x).unwrap(), direct) <= 1e-9, "{name} at {x}");
        }
    }
}

#[test]
fn cn_methods_agree_to_twelve_terms() {
    for (name, pair) in fixture_pairs(13) {
        for n in 1..=12 {
            let r = pair.cn_all(n).unwrap();
            assert!(r.spread <= 1e-8, "{name} n={n}: {}", r.spread);
        }
    }
}

#[test]
fn cn_on_linear_lattice_is_constant_ratio() {
    // 𝒴_n is a ratio of monic degree-n products with equal spacing, so
    // every method must agree with the primary one
    let pair = linear_pair(6);
    for n in 1..=5 {
        let base = pair.cn(n).unwrap();
        for m in CnMethod::ALL {
            assert!(rel(pair.cn_by(n, m).unwrap(), base) <= 1e-12);
        }
    }
}

#[test]
fn dn_closed_forms_match_direct() {
    for (name, pair) in fixture_pairs(7) {
        let pts = samples(&pair, 0.3, 2.5, 10, 11);
        for n in 1..=6 {
            for at in [DnPoint::Xm1, DnPoint::Xn1, DnPoint::Xp0, DnPoint::Xpn] {
                let err = pair.dn_check(n, at, &pts).unwrap();
                assert!(err <= 1e-8, "{name} n={n} {at:?}: {err}");
            }
        }
    }
}

#[test]
fn basis_vanishes_on_nodes() {
    let pair = generic_pair(6);
    for n in 1..=5usize {
        for k in 0..n as i64 {
            let y = pair.y(k).unwrap();
            assert_eq!(pair.script_y(n, y).unwrap(), Scalar::new(0.0, 0.0));
        }
    }
}

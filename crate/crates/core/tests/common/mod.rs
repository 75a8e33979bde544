//! Fixture curves, lattices and equations shared by the integration tests.
#![allow(dead_code)]

use elliptic_core::diffops::{annulus_samples, BasisPair};
use elliptic_core::lattice::{LatticePair, LatticeSpec, OracleLattice};
use elliptic_core::solver::{DifferenceEquation, SolveOptions, SpecialOptions, SpecialSelect};
use elliptic_core::{re, BiquadraticCurve, Polynomial, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Scalar {
    Scalar::new(re, im)
}

pub fn rel(a: Scalar, b: Scalar) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

pub fn linear_curve() -> BiquadraticCurve {
    BiquadraticCurve::linear(re(1.0), re(0.0)).unwrap()
}

pub fn aw_oracle() -> OracleLattice {
    OracleLattice::AskeyWilson { a: re(0.0), b: re(1.0), c: re(1.0), q: re(0.5) }
}

pub fn aw_curve() -> BiquadraticCurve {
    aw_oracle().curve().unwrap()
}

/// `(y − x)(y − q x)` with `q = e^{2πiα}`: the lattice runs around circles.
pub fn circle_curve(alpha: f64) -> BiquadraticCurve {
    BiquadraticCurve::geometric(re(0.0), Scalar::from_polar(1.0, std::f64::consts::TAU * alpha)).unwrap()
}

/// Real coefficients uniform in [−2, 2].
pub fn random_curve(seed: u64) -> BiquadraticCurve {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut g = [[0.0; 3]; 3];
        for row in g.iter_mut() {
            for v in row.iter_mut() {
                *v = rng.gen_range(-2.0..=2.0);
            }
        }
        if let Ok(curve) = BiquadraticCurve::from_real(g) {
            return curve;
        }
    }
}

/// A fixed generic curve with complex lattice points.
pub fn generic_curve() -> BiquadraticCurve {
    BiquadraticCurve::from_real([[0.3, -1.1, 1.0], [0.7, 0.4, -0.6], [1.2, 0.5, 0.9]]).unwrap()
}

/// Node lattice seeded at index −1, pole lattice at index 0, materialised for `n` terms.
pub fn pair_on(curve: &BiquadraticCurve, xm1: Scalar, ym1: Scalar, xp0: Scalar, yp0: Scalar, n: usize) -> BasisPair {
    let u = LatticeSpec::new(curve.clone(), xm1, ym1).unwrap().at_index(-1);
    let p = LatticeSpec::new(curve.clone(), xp0, yp0).unwrap();
    let mut pair = BasisPair::new(LatticePair::new(u), LatticePair::new(p)).unwrap();
    pair.extend_to(n).unwrap();
    pair
}

/// Nodes `y_n = n`, poles `y'_n = n + 1/2`.
pub fn linear_pair(n: usize) -> BasisPair {
    pair_on(&linear_curve(), re(-1.0), re(-1.0), re(0.5), re(0.5), n)
}

pub fn generic_pair(n: usize) -> BasisPair {
    let cv = generic_curve();
    let (xm1, xp0) = (c(0.4, 0.2), c(-0.3, 0.5));
    let ym1 = cv.y_roots(xm1, None).unwrap().first;
    let yp0 = cv.y_roots(xp0, None).unwrap().first;
    pair_on(&cv, xm1, ym1, xp0, yp0, n)
}

/// Askey–Wilson curve with nodes from `x = 1.3 e^{0.4i}` and poles from `x = −0.9 + 0.8i`.
pub fn aw_pair(n: usize) -> BasisPair {
    let cv = aw_curve();
    let (xm1, xp0) = (Scalar::from_polar(2.3, 0.4), c(-0.9, 0.8));
    let ym1 = cv.y_roots(xm1, None).unwrap().first;
    let yp0 = cv.y_roots(xp0, None).unwrap().first;
    pair_on(&cv, xm1, ym1, xp0, yp0, n)
}

pub fn circle_pair(alpha: f64, n: usize) -> BasisPair {
    let cv = circle_curve(alpha);
    let xm1 = Scalar::from_polar(1.0, 0.3);
    let xp0 = Scalar::from_polar(3.0, 1.1);
    pair_on(&cv, xm1, xm1, xp0, xp0, n)
}

pub fn fixture_pairs(n: usize) -> Vec<(&'static str, BasisPair)> {
    vec![
        ("linear", linear_pair(n)),
        ("generic", generic_pair(n)),
        ("askey-wilson", aw_pair(n)),
        ("circle", circle_pair((5f64.sqrt() - 1.0) / 2.0, n)),
    ]
}

/// Seeded samples on an annulus, away from every lattice point of `pair`.
pub fn samples(pair: &BasisPair, r_in: f64, r_out: f64, count: usize, seed: u64) -> Vec<Scalar> {
    annulus_samples(re(0.0), r_in, r_out, count, seed, &pair.lattice_values(), 1e-2)
}

fn cubic() -> Polynomial {
    Polynomial::new(vec![c(0.2, -0.4), c(-0.7, 0.1), c(0.5, 0.3), c(0.9, -0.6)])
}

/// General-mode equations (deg a = 3, c and d with the `X_2` factor).
pub fn general_equations() -> Vec<(&'static str, DifferenceEquation)> {
    vec![
        ("generic", DifferenceEquation::new(generic_curve(), cubic(), (re(0.7), re(-0.3)), (re(0.4), re(0.9))).unwrap()),
        ("linear", DifferenceEquation::new(linear_curve(), cubic(), (c(0.2, 0.5), re(1.0)), (re(-1.0), c(0.3, 0.3))).unwrap()),
        ("askey-wilson", DifferenceEquation::new(aw_curve(), Polynomial::from_real(&[0.5, -1.0, 0.25, 0.1]), (re(0.3), re(0.6)), (re(1.0), re(0.5))).unwrap()),
        ("circle", DifferenceEquation::new(circle_curve(0.23), cubic(), (re(0.5), c(0.1, 0.4)), (re(0.8), re(-0.2))).unwrap()),
    ]
}

pub const GOLDEN: f64 = 0.618_033_988_749_894_8;

/// Logarithmic equation on the circle lattice with `a = (x − x_{−1})(x − x'_0)(x − ζ)`,
/// `|x_{−1}| = 1`, `|ζ| = 2`, `|x'_0| = 3` and `d = x − x_{−1}`.
pub fn circle_log_equation() -> (DifferenceEquation, SolveOptions) {
    let xm1 = Scalar::from_polar(1.0, 0.3);
    let xp0 = Scalar::from_polar(3.0, 1.1);
    let zeta = Scalar::from_polar(2.0, 2.0);
    let a = Polynomial::from_roots(re(1.0), &[xm1, xp0, zeta]);
    let eq = DifferenceEquation::logarithmic(circle_curve(GOLDEN), a, re(1.0), -xm1).unwrap();
    let opts = SolveOptions {
        special: SpecialOptions {
            m1: SpecialSelect::Nearest(xm1),
            p0: SpecialSelect::Nearest(xp0),
            y_m1_hint: Some(xm1),
            y_p0_hint: Some(xp0),
        },
        n: 60,
        c0_free: Some(re(0.5)),
        ..Default::default()
    };
    (eq, opts)
}

/// Logarithmic equation on the linear curve whose solution telescopes to
/// `f(y) = const − δ/(y − y'_1)`.
pub fn telescoping_equation(delta: Scalar) -> (DifferenceEquation, SolveOptions, Scalar, Scalar) {
    let xm1 = c(0.25, 0.1);
    let xp0 = c(-0.6, 0.35);
    let a = Polynomial::from_roots(re(1.0), &[xm1, xp0, xp0 + 1.0]);
    let eq = DifferenceEquation::logarithmic(linear_curve(), a, delta, -delta * xm1).unwrap();
    let opts = SolveOptions {
        special: SpecialOptions {
            m1: SpecialSelect::Nearest(xm1),
            p0: SpecialSelect::Nearest(xp0),
            y_m1_hint: Some(xm1),
            y_p0_hint: Some(xp0),
        },
        n: 10,
        c0_free: Some(c(0.5, -0.2)),
        ..Default::default()
    };
    (eq, opts, xm1, xp0)
}

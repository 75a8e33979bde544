//! Dense complex polynomials and rational functions.
//!
//! Coefficients are stored in ascending degree. Every constructor normalizes
//! the representation: trailing coefficients whose modulus is at most
//! [`ZERO_COEFF_RTOL`] times the largest modulus are dropped, so the stored
//! leading coefficient is nonzero unless the polynomial is identically zero
//! (stored as the single coefficient `0`).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::Scalar;

/// Relative threshold below which a leading coefficient counts as zero.
pub const ZERO_COEFF_RTOL: f64 = 1e-13;

/// Relative size of `|p(z)|` (against `Σ|p_i||z|^i`) treated as a zero value
/// when deciding between a removable singularity and a pole.
pub const EVAL_ZERO_RTOL: f64 = 1e-10;

const ABERTH_MAX_ITER: usize = 500;
const POLISH_STEPS: usize = 6;

#[derive(Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Scalar>,
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial{:?}", self.coeffs)
    }
}

impl Polynomial {
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        let mut p = Polynomial { coeffs };
        p.normalize();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Scalar::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Polynomial {
            coeffs: vec![Scalar::new(0.0, 0.0)],
        }
    }

    pub fn constant(c: Scalar) -> Self {
        Self::new(vec![c])
    }

    pub fn one() -> Self {
        Self::constant(Scalar::new(1.0, 0.0))
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![Scalar::new(0.0, 0.0), Scalar::new(1.0, 0.0)])
    }

    /// `x - r`.
    pub fn linear_factor(r: Scalar) -> Self {
        Self::new(vec![-r, Scalar::new(1.0, 0.0)])
    }

    /// `lead * Π (x - r_i)`.
    pub fn from_roots(lead: Scalar, roots: &[Scalar]) -> Self {
        let mut coeffs = vec![lead];
        for &r in roots {
            let mut next = vec![Scalar::new(0.0, 0.0); coeffs.len() + 1];
            for (i, &c) in coeffs.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    fn normalize(&mut self) {
        let scale = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if self.coeffs.is_empty() || scale == 0.0 {
            self.coeffs = vec![Scalar::new(0.0, 0.0)];
            return;
        }
        while self.coeffs.len() > 1 {
            let lead = self.coeffs[self.coeffs.len() - 1].norm();
            if lead <= ZERO_COEFF_RTOL * scale {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        if self.coeffs.len() == 1 && self.coeffs[0].norm() == 0.0 {
            self.coeffs[0] = Scalar::new(0.0, 0.0);
        }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Scalar {
        self.coeffs.get(i).copied().unwrap_or_default()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].norm() == 0.0
    }

    pub fn leading(&self) -> Scalar {
        self.coeffs[self.coeffs.len() - 1]
    }

    /// Largest coefficient modulus.
    pub fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Σ |p_i| |z|^i`, the natural magnitude against which `|p(z)|` is judged.
    pub fn abs_scale_at(&self, z: Scalar) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn eval(&self, z: Scalar) -> Scalar {
        self.coeffs
            .iter()
            .rev()
            .fold(Scalar::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Scalar) -> (Scalar, Scalar) {
        let mut p = Scalar::new(0.0, 0.0);
        let mut dp = Scalar::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale_by(&self, s: Scalar) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut out = Self::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Polynomial) -> Result<(Polynomial, Polynomial)> {
        if divisor.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        let dd = divisor.degree();
        if self.degree() < dd || self.is_zero() {
            return Ok((Self::zero(), self.clone()));
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Scalar::new(0.0, 0.0); self.degree() - dd + 1];
        for k in (0..quot.len()).rev() {
            let t = rem[k + dd] / lead;
            quot[k] = t;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= t * dc;
            }
            rem[k + dd] = Scalar::new(0.0, 0.0);
        }
        rem.truncate(dd.max(1));
        // the remainder is only meaningful relative to the dividend, so it is
        // not re-normalized against its own (tiny) scale
        let mut r = Polynomial { coeffs: rem };
        if r.coeffs.iter().all(|c| c.norm() <= ZERO_COEFF_RTOL * self.scale()) {
            r = Self::zero();
        } else {
            while r.coeffs.len() > 1 && r.coeffs[r.coeffs.len() - 1].norm() == 0.0 {
                r.coeffs.pop();
            }
        }
        Ok((Self::new(quot), r))
    }

    /// Synthetic division by `(x - r)`; the remainder `p(r)` is returned alongside.
    pub fn deflate(&self, r: Scalar) -> (Polynomial, Scalar) {
        let n = self.coeffs.len();
        if n == 1 {
            return (Self::zero(), self.coeffs[0]);
        }
        let mut q = vec![Scalar::new(0.0, 0.0); n - 1];
        let mut acc = self.coeffs[n - 1];
        for i in (0..n - 1).rev() {
            q[i] = acc;
            acc = acc * r + self.coeffs[i];
        }
        (Self::new(q), acc)
    }

    /// All complex roots with multiplicity.
    ///
    /// Degree one and two are closed form (the quadratic pairs the classic
    /// formula for the larger root with the product identity for the other);
    /// higher degrees use Aberth–Ehrlich simultaneous iteration. Every root is
    /// then Newton-polished.
    pub fn roots(&self) -> Result<Vec<Scalar>> {
        let n = self.degree();
        if n == 0 {
            return Err(Error::ConstantPolynomial);
        }
        let mut roots = match n {
            1 => vec![-self.coeffs[0] / self.coeffs[1]],
            2 => {
                let (r1, r2) = quadratic_roots(self.coeffs[2], self.coeffs[1], self.coeffs[0]);
                vec![r1, r2]
            }
            _ => self.aberth(),
        };
        for r in roots.iter_mut() {
            *r = self.polish(*r);
        }
        Ok(roots)
    }

    fn aberth(&self) -> Vec<Scalar> {
        let n = self.degree();
        let lead = self.leading().norm();
        // Fujiwara-type bound for the root moduli
        let radius = (0..n)
            .map(|i| (self.coeffs[i].norm() / lead).powf(1.0 / (n - i) as f64))
            .fold(0.0, f64::max)
            .max(1e-3);
        let mut z: Vec<Scalar> = (0..n)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
                Scalar::from_polar(radius, theta)
            })
            .collect();
        let dp = self.derivative();
        for _ in 0..ABERTH_MAX_ITER {
            let mut max_step: f64 = 0.0;
            for k in 0..n {
                let pk = self.eval(z[k]);
                if pk.norm() == 0.0 {
                    continue;
                }
                let ratio = pk / dp.eval(z[k]);
                let repulsion: Scalar = (0..n)
                    .filter(|&j| j != k)
                    .map(|j| Scalar::new(1.0, 0.0) / (z[k] - z[j]))
                    .sum();
                let step = ratio / (Scalar::new(1.0, 0.0) - ratio * repulsion);
                if step.is_finite() {
                    z[k] -= step;
                    max_step = max_step.max(step.norm() / z[k].norm().max(1.0));
                }
            }
            if max_step < 1e-15 {
                break;
            }
        }
        z
    }

    fn polish(&self, mut r: Scalar) -> Scalar {
        let mut best = self.eval(r).norm();
        for _ in 0..POLISH_STEPS {
            if best == 0.0 {
                break;
            }
            let (p, dp) = self.eval_with_derivative(r);
            let candidate = r - p / dp;
            if !candidate.is_finite() {
                break;
            }
            let val = self.eval(candidate).norm();
            if val < best {
                best = val;
                r = candidate;
            } else {
                break;
            }
        }
        r
    }
}

/// Roots of `a t² + b t + c` (`a ≠ 0`), computed without cancellation.
///
/// The first root is `(-b - s)/(2a)` and the second `(-b + s)/(2a)` with `s`
/// the principal square root of the discriminant; whichever of the two is the
/// larger in modulus comes from the classic formula and the other from the
/// product `c/a`.
pub fn quadratic_roots(a: Scalar, b: Scalar, c: Scalar) -> (Scalar, Scalar) {
    let s = (b * b - a * c * 4.0).sqrt();
    let minus = -b - s;
    let plus = -b + s;
    if minus.norm() >= plus.norm() {
        let r1 = minus / (a * 2.0);
        let r2 = if r1.norm() == 0.0 { plus / (a * 2.0) } else { c / (a * r1) };
        (r1, r2)
    } else {
        let r2 = plus / (a * 2.0);
        let r1 = if r2.norm() == 0.0 { minus / (a * 2.0) } else { c / (a * r2) };
        (r1, r2)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = vec![Scalar::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|&c| -c).collect())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $f:ident, $t:ty) => {
        impl $tr<$t> for $t {
            type Output = $t;
            fn $f(self, rhs: $t) -> $t {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&$t> for $t {
            type Output = $t;
            fn $f(self, rhs: &$t) -> $t {
                (&self).$f(rhs)
            }
        }
        impl $tr<$t> for &$t {
            type Output = $t;
            fn $f(self, rhs: $t) -> $t {
                self.$f(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, Polynomial);
forward_binop!(Sub, sub, Polynomial);
forward_binop!(Mul, mul, Polynomial);
forward_binop!(Add, add, RationalFunction);
forward_binop!(Sub, sub, RationalFunction);
forward_binop!(Mul, mul, RationalFunction);

/// Ratio of two polynomials. Common factors are not cancelled eagerly;
/// [`RationalFunction::eval`] removes them locally where they matter.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFunction {
    numer: Polynomial,
    denom: Polynomial,
}

impl RationalFunction {
    pub fn new(numer: Polynomial, denom: Polynomial) -> Result<Self> {
        if denom.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        Ok(RationalFunction { numer, denom })
    }

    pub fn from_polynomial(p: Polynomial) -> Self {
        RationalFunction {
            numer: p,
            denom: Polynomial::one(),
        }
    }

    /// `1/(x - a)`.
    pub fn simple_pole(a: Scalar) -> Self {
        RationalFunction {
            numer: Polynomial::one(),
            denom: Polynomial::linear_factor(a),
        }
    }

    pub fn numer(&self) -> &Polynomial {
        &self.numer
    }

    pub fn denom(&self) -> &Polynomial {
        &self.denom
    }

    pub fn checked_div(&self, rhs: &RationalFunction) -> Result<RationalFunction> {
        if rhs.numer.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        RationalFunction::new(&self.numer * &rhs.denom, &self.denom * &rhs.numer)
    }

    /// Evaluates `numer/denom` at `z`. When both vanish at `z` the common
    /// factor `(x - z)` is divided out of both, repeatedly, before evaluating.
    pub fn eval(&self, z: Scalar) -> Result<Scalar> {
        let mut n = self.numer.clone();
        let mut d = self.denom.clone();
        loop {
            let dv = d.eval(z);
            let d_zero = dv.norm() <= EVAL_ZERO_RTOL * d.abs_scale_at(z);
            if !d_zero {
                return Ok(n.eval(z) / dv);
            }
            let nv = n.eval(z);
            let n_zero = nv.norm() <= EVAL_ZERO_RTOL * n.abs_scale_at(z);
            if !n_zero || d.degree() == 0 {
                return Err(Error::PoleEvaluation(z));
            }
            if n.is_zero() {
                return Ok(Scalar::new(0.0, 0.0));
            }
            if n.degree() == 0 {
                return Err(Error::PoleEvaluation(z));
            }
            n = n.deflate(z).0;
            d = d.deflate(z).0;
        }
    }
}

impl Add for &RationalFunction {
    type Output = RationalFunction;
    fn add(self, rhs: &RationalFunction) -> RationalFunction {
        if self.denom == rhs.denom {
            return RationalFunction {
                numer: &self.numer + &rhs.numer,
                denom: self.denom.clone(),
            };
        }
        RationalFunction {
            numer: &(&self.numer * &rhs.denom) + &(&rhs.numer * &self.denom),
            denom: &self.denom * &rhs.denom,
        }
    }
}

impl Sub for &RationalFunction {
    type Output = RationalFunction;
    fn sub(self, rhs: &RationalFunction) -> RationalFunction {
        if self.denom == rhs.denom {
            return RationalFunction {
                numer: &self.numer - &rhs.numer,
                denom: self.denom.clone(),
            };
        }
        RationalFunction {
            numer: &(&self.numer * &rhs.denom) - &(&rhs.numer * &self.denom),
            denom: &self.denom * &rhs.denom,
        }
    }
}

impl Mul for &RationalFunction {
    type Output = RationalFunction;
    fn mul(self, rhs: &RationalFunction) -> RationalFunction {
        RationalFunction {
            numer: &self.numer * &rhs.numer,
            denom: &self.denom * &rhs.denom,
        }
    }
}

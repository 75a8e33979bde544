//! The divided-difference operator `𝒟f(x) = (f(ψ) − f(φ))/(ψ − φ)` and the
//! mean `ℳf(x) = (f(φ) + f(ψ))/2` over the two `y`-roots of `F(x, ·)`, the
//! interpolation bases `𝒳_n`, `𝒴_n` built on two lattices, and the constants
//! `C_n` and quadratics `D_n` with
//!
//! ```text
//! 𝒟𝒴_n(x) = C_n X_2(x) 𝒳_{n−1}(x) / ((x − x'_0)(x − x'_n))
//! ℳ𝒴_n(x) = D_n(x) 𝒳_{n−1}(x) / ((x − x'_0)(x − x'_n))
//! ```

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::curve::{BiquadraticCurve, RootPair};
use crate::error::{Error, Result};
use crate::lattice::LatticePair;
use crate::poly::{Polynomial, RationalFunction};
use crate::Scalar;

/// A denominator smaller than this, relative to its own terms, is degenerate.
pub const DEGENERATE_RTOL: f64 = 1e-13;

fn zero() -> Scalar {
    Scalar::new(0.0, 0.0)
}

fn one() -> Scalar {
    Scalar::new(1.0, 0.0)
}

/// `(f(ψ) − f(φ))/(ψ − φ)` for a given root pair.
pub fn divided_difference<F>(pair: &RootPair, f: F) -> Result<Scalar>
where
    F: Fn(Scalar) -> Result<Scalar>,
{
    let gap = pair.second - pair.first;
    let s = 1.0_f64.max(pair.first.norm()).max(pair.second.norm());
    if gap.norm() <= crate::curve::BRANCH_RTOL * s {
        return Err(Error::BranchPointEvaluation(pair.at));
    }
    Ok((f(pair.second)? - f(pair.first)?) / gap)
}

/// `(f(φ) + f(ψ))/2` for a given root pair.
pub fn mean<F>(pair: &RootPair, f: F) -> Result<Scalar>
where
    F: Fn(Scalar) -> Result<Scalar>,
{
    Ok((f(pair.first)? + f(pair.second)?) * 0.5)
}

pub fn apply_d_pointwise<F>(curve: &BiquadraticCurve, f: F, x: Scalar) -> Result<Scalar>
where
    F: Fn(Scalar) -> Result<Scalar>,
{
    divided_difference(&curve.y_roots(x, None)?, f)
}

pub fn apply_m_pointwise<F>(curve: &BiquadraticCurve, f: F, x: Scalar) -> Result<Scalar>
where
    F: Fn(Scalar) -> Result<Scalar>,
{
    mean(&curve.y_roots(x, None)?, f)
}

/// Polynomial in the elementary symmetric functions `e1 = φ + ψ`, `e2 = φψ`,
/// keyed by `(power of e1, power of e2)`.
type Sym = BTreeMap<(usize, usize), Scalar>;

fn sym_add(acc: &mut Sym, key: (usize, usize), v: Scalar) {
    *acc.entry(key).or_insert_with(zero) += v;
}

fn sym_mul(a: &Sym, b: &Sym) -> Sym {
    let mut out = Sym::new();
    for (&(i, j), &u) in a {
        for (&(k, l), &v) in b {
            sym_add(&mut out, (i + k, j + l), u * v);
        }
    }
    out
}

fn sym_scaled(a: &Sym, s: Scalar, e2_shift: usize) -> Sym {
    a.iter().map(|(&(i, j), &v)| ((i, j + e2_shift), v * s)).collect()
}

/// `h_m = (ψ^{m+1} − φ^{m+1})/(ψ − φ)` and `p_m = φ^m + ψ^m` as polynomials in `e1, e2`.
fn symmetric_tables(m: usize) -> (Vec<Sym>, Vec<Sym>) {
    let e1: Sym = [((1, 0), one())].into();
    let e2: Sym = [((0, 1), one())].into();
    let step = |prev: &Sym, prev2: &Sym| {
        let mut next = sym_mul(&e1, prev);
        for (&k, &v) in &sym_mul(&e2, prev2) {
            sym_add(&mut next, k, -v);
        }
        next
    };
    let mut h: Vec<Sym> = vec![[((0, 0), one())].into()];
    if m >= 1 {
        h.push(e1.clone());
    }
    while h.len() <= m {
        let n = h.len();
        let next = step(&h[n - 1], &h[n - 2]);
        h.push(next);
    }
    let mut p: Vec<Sym> = vec![[((0, 0), Scalar::new(2.0, 0.0))].into(), e1.clone()];
    while p.len() <= m {
        let n = p.len();
        let next = step(&p[n - 1], &p[n - 2]);
        p.push(next);
    }
    (h, p)
}

/// Exact `𝒟f` for rational `f = N/Q`, as a rational function of `x`.
///
/// `f(ψ) − f(φ)` over `ψ − φ` and `f(φ)f(ψ)`-type products are symmetric in
/// the root pair, so both numerator and denominator are polynomials in
/// `e1 = −X_1/X_2` and `e2 = X_0/X_2`. Clearing the common power of `X_2`
/// leaves a polynomial fraction in `x`.
pub fn apply_d_rational(curve: &BiquadraticCurve, f: &RationalFunction) -> Result<RationalFunction> {
    let n = f.numer().coeffs();
    let q = f.denom().coeffs();
    let m = n.len().max(q.len());
    let (h, p) = symmetric_tables(m);

    // S = Σ n_i q_j (ψ^i φ^j − φ^i ψ^j)/(ψ − φ)
    let mut s = Sym::new();
    for (i, &ni) in n.iter().enumerate() {
        for (j, &qj) in q.iter().enumerate() {
            let w = ni * qj;
            if w == zero() || i == j {
                continue;
            }
            let (lo, hi, sign) = if i > j { (j, i, 1.0) } else { (i, j, -1.0) };
            for (&k, &v) in &sym_scaled(&h[hi - lo - 1], w * sign, lo) {
                sym_add(&mut s, k, v);
            }
        }
    }
    // T = Q(φ) Q(ψ)
    let mut t = Sym::new();
    for (i, &qi) in q.iter().enumerate() {
        sym_add(&mut t, (0, i), qi * qi);
        for (j, &qj) in q.iter().enumerate().skip(i + 1) {
            for (&k, &v) in &sym_scaled(&p[j - i], qi * qj, i) {
                sym_add(&mut t, k, v);
            }
        }
    }

    let [x0, x1, x2] = curve.x_view();
    let weight = |sym: &Sym| sym.iter().filter(|(_, v)| **v != zero()).map(|(&(a, b), _)| a + b).max();
    let d = weight(&s).into_iter().chain(weight(&t)).max().unwrap_or(0);
    let neg_x1 = -x1;
    let homogenize = |sym: &Sym| {
        let mut acc = Polynomial::zero();
        for (&(b, a), &v) in sym {
            if v == zero() {
                continue;
            }
            let term = &(&neg_x1.pow(b) * &x0.pow(a)) * &x2.pow(d - a - b);
            acc = &acc + &term.scale_by(v);
        }
        acc
    };
    let numer = homogenize(&s);
    let denom = homogenize(&t);
    if denom.is_zero() {
        return Err(Error::ReconstructionFallback(
            "Q(φ)Q(ψ) vanishes identically on this curve".into(),
        ));
    }
    RationalFunction::new(numer, denom)
}

/// Which interpolation basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    /// `𝒳_n(z) = Π_{k<n}(z − x_k) / Π_{k=1..n}(z − x'_k)`.
    X,
    /// `𝒴_n(z) = Π_{k<n}(z − y_k) / Π_{k=1..n}(z − y'_k)`.
    Y,
}

/// The four equivalent expressions for `C_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CnMethod {
    AtXm1,
    AtXn1,
    ResXp0,
    ResXpn,
}

impl CnMethod {
    pub const ALL: [CnMethod; 4] = [CnMethod::AtXm1, CnMethod::AtXn1, CnMethod::ResXp0, CnMethod::ResXpn];
}

/// Points where `D_n` has a closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DnPoint {
    Xm1,
    Xn1,
    Xp0,
    Xpn,
}

/// Every method's value for one `C_n`, with their spread.
#[derive(Clone, Debug)]
pub struct CnReport {
    pub n: usize,
    pub values: Vec<(CnMethod, Result<Scalar>)>,
    pub value: Scalar,
    /// `max |C_i − C_j| / max |C_i|` over non-degenerate methods.
    pub spread: f64,
}

/// Two lattices on one curve: the unprimed one (nodes `y_n`) and the primed
/// one (poles `y'_n`).
#[derive(Clone, Debug)]
pub struct BasisPair {
    pub unprimed: LatticePair,
    pub primed: LatticePair,
}

fn check_den(v: Scalar, scale: f64, what: &str) -> Result<Scalar> {
    if !v.is_finite() || v.norm() <= DEGENERATE_RTOL * scale.max(f64::MIN_POSITIVE) {
        Err(Error::MethodDegenerate(format!("{what} vanishes")))
    } else {
        Ok(v)
    }
}

fn diff(a: Scalar, b: Scalar, what: &str) -> Result<Scalar> {
    check_den(a - b, a.norm().max(b.norm()), what)
}

impl BasisPair {
    pub fn new(unprimed: LatticePair, primed: LatticePair) -> Result<Self> {
        if unprimed.curve() != primed.curve() {
            return Err(Error::InvalidCurve("the two lattices lie on different curves".into()));
        }
        Ok(BasisPair { unprimed, primed })
    }

    pub fn curve(&self) -> &BiquadraticCurve {
        self.unprimed.curve()
    }

    /// Materialises the indices needed for terms up to `n`: unprimed `−1..=n`,
    /// primed `0..=n+1`.
    pub fn extend_to(&mut self, n: usize) -> Result<()> {
        self.unprimed.extend_to(-1, n as i64)?;
        self.primed.extend_to(0, n as i64 + 1)
    }

    pub fn x(&self, n: i64) -> Result<Scalar> {
        self.unprimed.x(n)
    }

    pub fn y(&self, n: i64) -> Result<Scalar> {
        self.unprimed.y(n)
    }

    pub fn xp(&self, n: i64) -> Result<Scalar> {
        self.primed.x(n)
    }

    pub fn yp(&self, n: i64) -> Result<Scalar> {
        self.primed.y(n)
    }

    /// `𝒳_n(z)` or `𝒴_n(z)`, multiplied out pairwise.
    pub fn basis(&self, kind: BasisKind, n: usize, z: Scalar) -> Result<Scalar> {
        let mut acc = one();
        for k in 0..n as i64 {
            let (node, pole) = match kind {
                BasisKind::X => (self.x(k)?, self.xp(k + 1)?),
                BasisKind::Y => (self.y(k)?, self.yp(k + 1)?),
            };
            let den = z - pole;
            if den.norm() <= f64::EPSILON * (z.norm() + pole.norm()) {
                return Err(Error::PoleEvaluation(z));
            }
            acc *= (z - node) / den;
        }
        if !acc.is_finite() {
            return Err(Error::PoleEvaluation(z));
        }
        Ok(acc)
    }

    /// `𝒳_n(z)`, rejected as degenerate when `z` sits on one of its zeros.
    fn script_x_nonzero(&self, n: usize, z: Scalar, what: &str) -> Result<Scalar> {
        for k in 0..n as i64 {
            let node = self.x(k)?;
            diff(z, node, what)?;
        }
        self.script_x(n, z).map_err(|e| Error::MethodDegenerate(format!("{what}: {e}")))
    }

    pub fn script_x(&self, n: usize, z: Scalar) -> Result<Scalar> {
        self.basis(BasisKind::X, n, z)
    }

    pub fn script_y(&self, n: usize, z: Scalar) -> Result<Scalar> {
        self.basis(BasisKind::Y, n, z)
    }

    /// `C_n` by one method. `C_0 = 0`.
    pub fn cn_by(&self, n: usize, method: CnMethod) -> Result<Scalar> {
        if n == 0 {
            return Ok(zero());
        }
        let ni = n as i64;
        let c = self.curve();
        let xp0 = self.xp(0)?;
        let xpn = self.xp(ni)?;
        let degenerate = |e: Error| match e {
            Error::PoleEvaluation(_) | Error::VerticalTangent { .. } | Error::LeadingCoefficientVanishes(_) => {
                Error::MethodDegenerate(format!("{method:?}: {e}"))
            }
            other => other,
        };
        let value = match method {
            CnMethod::AtXm1 => {
                let (xm1, ym1) = (self.x(-1)?, self.y(-1)?);
                let den = diff(self.y(0)?, ym1, "y_0 - y_-1")?
                    * check_den(c.x2(xm1), c.x_view()[2].abs_scale_at(xm1), "X_2(x_-1)")?
                    * self.script_x_nonzero(n - 1, xm1, "X_{n-1}(x_-1)")?;
                -self.script_y(n, ym1).map_err(degenerate)? * (xm1 - xp0) * (xm1 - xpn) / den
            }
            CnMethod::AtXn1 => {
                let xn1 = self.x(ni - 1)?;
                let yn = self.y(ni)?;
                let den = diff(yn, self.y(ni - 1)?, "y_n - y_{n-1}")?
                    * check_den(c.x2(xn1), c.x_view()[2].abs_scale_at(xn1), "X_2(x_{n-1})")?
                    * self.script_x_nonzero(n - 1, xn1, "X_{n-1}(x_{n-1})")?;
                self.script_y(n, yn).map_err(degenerate)? * (xn1 - xp0) * (xn1 - xpn) / den
            }
            CnMethod::ResXp0 => {
                let yp1 = self.yp(1)?;
                let slope = c.implicit_dy_dx(xp0, yp1).map_err(degenerate)?;
                let mut r = one();
                for k in 0..ni {
                    r *= yp1 - self.y(k)?;
                }
                let mut den = check_den(slope, 1.0, "dψ/dx at x'_0")?;
                for k in 2..=ni {
                    den *= diff(yp1, self.yp(k)?, "y'_1 - y'_k")?;
                }
                let den2 = diff(yp1, self.yp(0)?, "y'_1 - y'_0")?
                    * check_den(c.x2(xp0), c.x_view()[2].abs_scale_at(xp0), "X_2(x'_0)")?
                    * self.script_x_nonzero(n - 1, xp0, "X_{n-1}(x'_0)")?;
                r / den * (xp0 - xpn) / den2
            }
            CnMethod::ResXpn => {
                let ypn = self.yp(ni)?;
                let slope = c.implicit_dy_dx(xpn, ypn).map_err(degenerate)?;
                let mut r = one();
                for k in 0..ni {
                    r *= ypn - self.y(k)?;
                }
                let mut den = check_den(slope, 1.0, "dφ/dx at x'_n")?;
                for k in 1..ni {
                    den *= diff(ypn, self.yp(k)?, "y'_n - y'_k")?;
                }
                let den2 = diff(self.yp(ni + 1)?, ypn, "y'_{n+1} - y'_n")?
                    * check_den(c.x2(xpn), c.x_view()[2].abs_scale_at(xpn), "X_2(x'_n)")?
                    * self.script_x_nonzero(n - 1, xpn, "X_{n-1}(x'_n)")?;
                -r / den * (xpn - xp0) / den2
            }
        };
        if !value.is_finite() {
            return Err(Error::MethodDegenerate(format!("{method:?} is not finite")));
        }
        Ok(value)
    }

    /// `C_n` from the derivative-free expression at `x_{−1}`, falling back to
    /// the one at `x_{n−1}`.
    pub fn cn(&self, n: usize) -> Result<Scalar> {
        match self.cn_by(n, CnMethod::AtXm1) {
            Err(Error::MethodDegenerate(e)) => {
                log::debug!("C_{n}: {e}; using the x_(n-1) expression");
                self.cn_by(n, CnMethod::AtXn1)
            }
            other => other,
        }
    }

    /// All four methods and their agreement.
    pub fn cn_all(&self, n: usize) -> Result<CnReport> {
        let values: Vec<_> = CnMethod::ALL.iter().map(|&m| (m, self.cn_by(n, m))).collect();
        for (_, v) in &values {
            if let Err(e) = v {
                if !matches!(e, Error::MethodDegenerate(_)) {
                    return Err(e.clone());
                }
            }
        }
        let ok: Vec<Scalar> = values.iter().filter_map(|(_, v)| v.as_ref().ok().copied()).collect();
        if ok.len() < 2 {
            return Err(Error::MethodDegenerate(format!(
                "C_{n}: only {} usable expressions",
                ok.len()
            )));
        }
        let big = ok.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut spread = 0.0_f64;
        for a in &ok {
            for b in &ok {
                spread = spread.max((a - b).norm());
            }
        }
        let spread = if big == 0.0 { 0.0 } else { spread / big };
        Ok(CnReport {
            n,
            value: ok[0],
            values,
            spread,
        })
    }

    /// `C_0..=C_n_max`.
    pub fn cn_table(&self, n_max: usize) -> Result<Vec<Scalar>> {
        (0..=n_max).map(|n| self.cn(n)).collect()
    }

    /// Closed-form value of `D_n` at one of the four special abscissae.
    pub fn dn(&self, n: usize, at: DnPoint) -> Result<Scalar> {
        if n == 0 {
            return Ok(one());
        }
        let cn = self.cn(n)?;
        self.dn_with(n, cn, at)
    }

    fn dn_with(&self, n: usize, cn: Scalar, at: DnPoint) -> Result<Scalar> {
        let ni = n as i64;
        let c = self.curve();
        Ok(match at {
            DnPoint::Xm1 => -cn * c.x2(self.x(-1)?) * (self.y(0)? - self.y(-1)?) * 0.5,
            DnPoint::Xn1 => cn * c.x2(self.x(ni - 1)?) * (self.y(ni)? - self.y(ni - 1)?) * 0.5,
            DnPoint::Xp0 => cn * c.x2(self.xp(0)?) * (self.yp(1)? - self.yp(0)?) * 0.5,
            DnPoint::Xpn => -cn * c.x2(self.xp(ni)?) * (self.yp(ni + 1)? - self.yp(ni)?) * 0.5,
        })
    }

    pub fn dn_abscissa(&self, n: usize, at: DnPoint) -> Result<Scalar> {
        let ni = n as i64;
        match at {
            DnPoint::Xm1 => self.x(-1),
            DnPoint::Xn1 => self.x(ni - 1),
            DnPoint::Xp0 => self.xp(0),
            DnPoint::Xpn => self.xp(ni),
        }
    }

    /// `D_n(x) = ℳ𝒴_n(x) (x − x'_0)(x − x'_n) / 𝒳_{n−1}(x)` evaluated directly.
    pub fn dn_direct(&self, n: usize, x: Scalar) -> Result<Scalar> {
        if n == 0 {
            return Ok(one());
        }
        let lin = (x - self.xp(0)?) * (x - self.xp(n as i64)?);
        let m = apply_m_pointwise(self.curve(), |y| self.script_y(n, y), x)?;
        let xn = self.script_x(n - 1, x)?;
        if xn.norm() == 0.0 || lin.norm() == 0.0 {
            return Err(Error::PoleEvaluation(x));
        }
        Ok(m * lin / xn)
    }

    /// Quadratic through `D_n` at three points, as a polynomial.
    pub fn dn_quadratic(&self, n: usize, nodes: [Scalar; 3]) -> Result<Polynomial> {
        let vals = [
            self.dn_direct(n, nodes[0])?,
            self.dn_direct(n, nodes[1])?,
            self.dn_direct(n, nodes[2])?,
        ];
        Ok(lagrange3(nodes, vals))
    }

    /// Relative gap between the closed form of `D_n` and `D_n` obtained
    /// without it: directly where `ℳ𝒴_n` is finite, otherwise from the
    /// quadratic through three sample points.
    pub fn dn_check(&self, n: usize, at: DnPoint, samples: &[Scalar]) -> Result<f64> {
        let closed = self.dn(n, at)?;
        let x = self.dn_abscissa(n, at)?;
        let other = match self.dn_direct(n, x) {
            Ok(v) => v,
            Err(_) => {
                let nodes = pick_nodes(samples, |z| self.dn_direct(n, z).is_ok())?;
                self.dn_quadratic(n, nodes)?.eval(x)
            }
        };
        Ok(rel_gap(closed, other))
    }

    /// Max relative gap between the two sides of
    /// `𝒟𝒴_n(x) = C_n X_2(x) 𝒳_{n−1}(x)/((x − x'_0)(x − x'_n))` over the samples.
    pub fn verify_d_basis_identity(&self, n: usize, samples: &[Scalar]) -> Result<f64> {
        let cn = self.cn(n)?;
        let c = self.curve();
        let mut worst: Option<f64> = None;
        for &x in samples {
            let lhs = apply_d_pointwise(c, |y| self.script_y(n, y), x);
            let rhs = (|| -> Result<Scalar> {
                if n == 0 {
                    return Ok(zero());
                }
                let den = (x - self.xp(0)?) * (x - self.xp(n as i64)?);
                Ok(cn * c.x2(x) * self.script_x(n - 1, x)? / den)
            })();
            match (lhs, rhs) {
                (Ok(l), Ok(r)) if l.is_finite() && r.is_finite() => {
                    worst = Some(worst.unwrap_or(0.0).max(rel_gap(l, r)));
                }
                (Err(e @ Error::NotMaterialized { .. }), _) | (_, Err(e @ Error::NotMaterialized { .. })) => {
                    return Err(e)
                }
                _ => {}
            }
        }
        worst.ok_or(Error::NoValidSamples)
    }

    /// Fits `D_n` through the first three usable samples and returns the max
    /// relative miss on the others.
    pub fn verify_dn_quadratic(&self, n: usize, samples: &[Scalar]) -> Result<f64> {
        let vals: Vec<(Scalar, Scalar)> = samples
            .iter()
            .filter_map(|&z| self.dn_direct(n, z).ok().map(|v| (z, v)))
            .collect();
        if vals.len() < 4 {
            return Err(Error::NoValidSamples);
        }
        let quad = lagrange3([vals[0].0, vals[1].0, vals[2].0], [vals[0].1, vals[1].1, vals[2].1]);
        Ok(vals[3..]
            .iter()
            .map(|&(z, v)| rel_gap(quad.eval(z), v))
            .fold(0.0, f64::max))
    }

    /// Every lattice abscissa and ordinate currently materialised on either lattice.
    pub fn lattice_values(&self) -> Vec<Scalar> {
        self.unprimed
            .iter()
            .chain(self.primed.iter())
            .flat_map(|(_, x, y)| [x, y])
            .collect()
    }
}

fn rel_gap(a: Scalar, b: Scalar) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

fn pick_nodes(samples: &[Scalar], ok: impl Fn(Scalar) -> bool) -> Result<[Scalar; 3]> {
    let good: Vec<Scalar> = samples.iter().copied().filter(|&z| ok(z)).take(3).collect();
    if good.len() < 3 {
        return Err(Error::NoValidSamples);
    }
    Ok([good[0], good[1], good[2]])
}

/// Interpolating polynomial of degree ≤ 2 through three points.
pub fn lagrange3(x: [Scalar; 3], v: [Scalar; 3]) -> Polynomial {
    let mut acc = Polynomial::zero();
    for i in 0..3 {
        let mut basis = Polynomial::constant(v[i]);
        for j in 0..3 {
            if i != j {
                basis = &basis * &Polynomial::linear_factor(x[j]).scale_by(one() / (x[i] - x[j]));
            }
        }
        acc = &acc + &basis;
    }
    acc
}

/// Seeded uniform samples on the annulus `r_in ≤ |z − center| ≤ r_out`,
/// kept at least `min_dist` away from every point in `avoid`.
pub fn annulus_samples(
    center: Scalar,
    r_in: f64,
    r_out: f64,
    count: usize,
    seed: u64,
    avoid: &[Scalar],
    min_dist: f64,
) -> Vec<Scalar> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 1000 * count.max(1) {
        tries += 1;
        let r = rng.gen_range(r_in..=r_out);
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        let z = center + Scalar::from_polar(r, t);
        if avoid.iter().all(|&a| (z - a).norm() >= min_dist) {
            out.push(z);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::re;

    fn close(a: Scalar, b: Scalar, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    fn linear_curve() -> BiquadraticCurve {
        BiquadraticCurve::linear(re(1.0), re(0.0)).unwrap()
    }

    /// Nodes `y_n = n`, poles `y'_n = n + 1/2`.
    fn linear_pair(n: usize) -> BasisPair {
        let c = linear_curve();
        let u = LatticePair::new(LatticeSpec::new(c.clone(), re(0.0), re(0.0)).unwrap());
        let p = LatticePair::new(LatticeSpec::new(c, re(0.5), re(0.5)).unwrap());
        let mut pair = BasisPair::new(u, p).unwrap();
        pair.extend_to(n).unwrap();
        pair
    }

    fn generic_curve() -> BiquadraticCurve {
        BiquadraticCurve::from_real([[0.3, -1.1, 1.0], [0.7, 0.4, -0.6], [1.2, 0.5, 0.9]]).unwrap()
    }

    fn generic_pair(n: usize) -> BasisPair {
        let c = generic_curve();
        let x0 = Scalar::new(0.4, 0.2);
        let xp0 = Scalar::new(-0.3, 0.5);
        let u = LatticeSpec::new(c.clone(), x0, c.y_roots(x0, None).unwrap().first).unwrap();
        let p = LatticeSpec::new(c.clone(), xp0, c.y_roots(xp0, None).unwrap().first).unwrap();
        let mut pair = BasisPair::new(LatticePair::new(u), LatticePair::new(p)).unwrap();
        pair.extend_to(n).unwrap();
        pair
    }

    #[test]
    fn pointwise_examples() {
        let c = linear_curve();
        let d = apply_d_pointwise(&c, |t| Ok(t * t), re(0.0)).unwrap();
        assert!(close(d, re(1.0), 1e-15));
        let d = apply_d_pointwise(&c, |_| Ok(re(3.0)), Scalar::new(0.3, 0.7)).unwrap();
        assert_eq!(d, re(0.0));
        assert_eq!(apply_m_pointwise(&c, |_| Ok(re(3.0)), re(2.0)).unwrap(), re(3.0));
        assert!(close(apply_m_pointwise(&c, Ok, re(0.0)).unwrap(), re(0.5), 1e-15));
    }

    #[test]
    fn mean_of_odd_function_at_symmetric_point() {
        // circle x^2 + y^2 = 1: φ = −ψ everywhere
        let c = BiquadraticCurve::from_real([[-1.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]).unwrap();
        let m = apply_m_pointwise(&c, |t| Ok(t * t * t), re(0.3)).unwrap();
        assert!(m.norm() < 1e-15);
    }

    #[test]
    fn swap_symmetry() {
        let c = generic_curve();
        let pair = c.y_roots(Scalar::new(0.2, -0.4), None).unwrap();
        let f = |t: Scalar| Ok(t.exp() / (t - 3.0));
        let a = divided_difference(&pair, f).unwrap();
        let b = divided_difference(&pair.swapped(), f).unwrap();
        assert!(close(a, b, 1e-14));
        assert!(close(mean(&pair, f).unwrap(), mean(&pair.swapped(), f).unwrap(), 1e-14));
    }

    #[test]
    fn branch_point_rejected() {
        let c = generic_curve();
        let bp = c.discriminant_p().roots().unwrap()[0];
        let pair = c.y_roots(bp, None).unwrap();
        let forced = RootPair { second: pair.first, ..pair };
        assert_eq!(divided_difference(&forced, Ok).unwrap_err(), Error::BranchPointEvaluation(bp));
        assert!(mean(&forced, Ok).is_ok());
    }

    #[test]
    fn simple_fraction() {
        let c = generic_curve();
        let a = Scalar::new(0.7, -0.2);
        let g = apply_d_rational(&c, &RationalFunction::simple_pole(a)).unwrap();
        let xp = c.x_roots(a, None).unwrap();
        for x in [Scalar::new(0.1, 0.3), Scalar::new(-1.2, 0.4), re(2.5)] {
            let expected = -c.x2(x) / (c.y2(a) * (x - xp.first) * (x - xp.second));
            assert!(close(g.eval(x).unwrap(), expected, 1e-12));
            let pointwise = apply_d_pointwise(&c, |t| Ok(one() / (t - a)), x).unwrap();
            assert!(close(pointwise, expected, 1e-12));
        }
    }

    #[test]
    fn rational_d_of_constant_is_zero() {
        let g = apply_d_rational(&generic_curve(), &RationalFunction::from_polynomial(Polynomial::constant(re(4.0)))).unwrap();
        assert!(g.numer().is_zero());
    }

    #[test]
    fn rational_d_matches_pointwise_and_carries_x2() {
        let c = BiquadraticCurve::from_real([[0.3, -1.1, 1.0], [0.7, 0.4, -0.6], [1.2, 0.5, 0.0]]).unwrap();
        let f = RationalFunction::new(
            Polynomial::from_real(&[1.0, -2.0, 0.5]),
            Polynomial::from_roots(one(), &[re(0.3), Scalar::new(-1.0, 0.4), re(2.0)]),
        )
        .unwrap();
        let g = apply_d_rational(&c, &f).unwrap();
        let (_, rem) = g.numer().div_rem(&c.x_view()[2]).unwrap();
        assert!(rem.scale() <= 1e-9 * g.numer().scale());
        for x in [Scalar::new(0.1, 0.3), Scalar::new(-1.2, 0.4), re(2.5)] {
            let pw = apply_d_pointwise(&c, |t| f.eval(t), x).unwrap();
            assert!(close(g.eval(x).unwrap(), pw, 1e-10));
        }
    }

    #[test]
    fn basis_values() {
        let pair = linear_pair(3);
        assert_eq!(pair.script_y(0, re(17.0)).unwrap(), one());
        for j in 0..3 {
            assert_eq!(pair.script_y(3, re(j as f64)).unwrap(), zero());
        }
        assert!(close(pair.script_y(2, re(5.0)).unwrap(), re(20.0 / 8.75), 1e-15));
        assert_eq!(pair.script_y(2, re(1.5)).unwrap_err(), Error::PoleEvaluation(re(1.5)));
    }

    #[test]
    fn c0_is_zero_and_methods_agree() {
        let pair = linear_pair(6);
        assert_eq!(pair.cn(0).unwrap(), zero());
        for n in 1..=5 {
            let r = pair.cn_all(n).unwrap();
            assert!(r.spread <= 1e-10, "n={n} spread={}", r.spread);
            assert!(r.value.is_finite());
        }
        let pair = generic_pair(8);
        for n in 1..=7 {
            let r = pair.cn_all(n).unwrap();
            assert!(r.spread <= 1e-8, "n={n} spread={}", r.spread);
        }
    }

    #[test]
    fn dn_closed_forms() {
        let pair = linear_pair(4);
        assert_eq!(pair.dn(0, DnPoint::Xp0).unwrap(), one());
        let c1 = pair.cn(1).unwrap();
        let expected = c1 * (pair.yp(1).unwrap() - pair.yp(0).unwrap()) * 0.5;
        assert!(close(pair.dn(1, DnPoint::Xp0).unwrap(), expected, 1e-15));

        let pair = generic_pair(6);
        let samples = annulus_samples(zero(), 0.5, 2.0, 10, 7, &pair.lattice_values(), 1e-2);
        for n in 1..=4 {
            for at in [DnPoint::Xm1, DnPoint::Xn1, DnPoint::Xp0, DnPoint::Xpn] {
                assert!(pair.dn_check(n, at, &samples).unwrap() < 1e-8, "n={n} {at:?}");
            }
            let c = pair.curve();
            let ratio = pair.dn(n, DnPoint::Xm1).unwrap() / pair.dn(n, DnPoint::Xp0).unwrap();
            let (xm1, xp0) = (pair.x(-1).unwrap(), pair.xp(0).unwrap());
            let expected = -c.x2(xm1) * (pair.y(0).unwrap() - pair.y(-1).unwrap())
                / (c.x2(xp0) * (pair.yp(1).unwrap() - pair.yp(0).unwrap()));
            assert!(close(ratio, expected, 1e-12));
        }
    }

    #[test]
    fn d_basis_identity() {
        let pair = generic_pair(6);
        let samples = annulus_samples(zero(), 0.3, 3.0, 20, 11, &pair.lattice_values(), 1e-2);
        assert_eq!(pair.verify_d_basis_identity(0, &samples).unwrap(), 0.0);
        for n in 1..=5 {
            assert!(pair.verify_d_basis_identity(n, &samples).unwrap() <= 1e-8);
            assert!(pair.verify_dn_quadratic(n, &samples).unwrap() <= 1e-8);
        }
        assert_eq!(pair.verify_d_basis_identity(2, &[]).unwrap_err(), Error::NoValidSamples);
    }

    #[test]
    fn lagrange_interpolates() {
        let p = Polynomial::from_real(&[1.0, -2.0, 3.0]);
        let x = [re(0.0), re(1.0), Scalar::new(0.0, 2.0)];
        let q = lagrange3(x, x.map(|z| p.eval(z)));
        assert!(close(q.eval(re(5.0)), p.eval(re(5.0)), 1e-13));
    }

    #[test]
    fn samples_are_seeded() {
        let a = annulus_samples(zero(), 1.0, 2.0, 5, 3, &[], 0.0);
        let b = annulus_samples(zero(), 1.0, 2.0, 5, 3, &[], 0.0);
        assert_eq!(a, b);
        assert!(a.iter().all(|z| (1.0..=2.0).contains(&z.norm())));
    }
}

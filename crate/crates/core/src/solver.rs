//! Interpolatory expansions `f = Σ c_k 𝒴_k` solving
//! `a(x) 𝒟f(x) = c(x) ℳf(x) + d(x)` with `c = (βx + γ) X_2`, `d = (δx + ε) X_2`
//! and `deg a ≤ 3`.
//!
//! The node lattice starts at a root `x_{−1}` of `a/(ψ − φ) + c/2`, the pole
//! lattice at a root `x'_0` of `a/(ψ − φ) − c/2`. Partial sums interpolate the
//! solution at `y_0, y_1, …` and have poles at `y'_1, y'_2, …`.

use serde::Serialize;

use crate::convergence::detect_small_divisors;
use crate::curve::{BiquadraticCurve, RootPair};
use crate::diffops::{divided_difference, mean, BasisPair};
use crate::error::{Error, Result};
use crate::lattice::{LatticePair, LatticeSpec};
use crate::poly::Polynomial;
use crate::Scalar;

/// Relative tolerance for a squared-equation root to count as a special point.
pub const SPECIAL_RTOL: f64 = 1e-8;
/// Relative tolerance of the `X_2` factor checks on `c` and `d`.
pub const FACTOR_RTOL: f64 = 1e-12;
/// Disagreement of the two `c_1` expressions above this is an internal error.
pub const C1_RTOL: f64 = 1e-6;
/// Default small-divisor threshold (relative to the median divisor).
pub const SMALLDIV_THRESHOLD: f64 = 1e-3;

fn zero() -> Scalar {
    Scalar::new(0.0, 0.0)
}

fn one() -> Scalar {
    Scalar::new(1.0, 0.0)
}

fn rel_gap(a: Scalar, b: Scalar) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Mode {
    General,
    /// `c ≡ 0`: the solution is fixed only up to an additive constant.
    Logarithmic,
}

/// `a(x) 𝒟f = c(x) ℳf + d(x)` on a curve.
#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceEquation {
    pub curve: BiquadraticCurve,
    pub a: Polynomial,
    pub c: Polynomial,
    pub d: Polynomial,
    pub beta: Scalar,
    pub gamma: Scalar,
    pub delta: Scalar,
    pub epsilon: Scalar,
}

impl DifferenceEquation {
    /// `c = (βx + γ) X_2`, `d = (δx + ε) X_2`.
    pub fn new(
        curve: BiquadraticCurve,
        a: Polynomial,
        (beta, gamma): (Scalar, Scalar),
        (delta, epsilon): (Scalar, Scalar),
    ) -> Result<Self> {
        if a.degree() > 3 {
            return Err(Error::DegreeMismatch(format!("deg a = {} > 3", a.degree())));
        }
        let x2 = &curve.x_view()[2];
        let c = x2 * &Polynomial::new(vec![gamma, beta]);
        let d = x2 * &Polynomial::new(vec![epsilon, delta]);
        Ok(DifferenceEquation {
            curve,
            a,
            c,
            d,
            beta,
            gamma,
            delta,
            epsilon,
        })
    }

    /// `c ≡ 0`.
    pub fn logarithmic(curve: BiquadraticCurve, a: Polynomial, delta: Scalar, epsilon: Scalar) -> Result<Self> {
        Self::new(curve, a, (zero(), zero()), (delta, epsilon))
    }

    /// From explicit `c` and `d`, which must both carry the factor `X_2`
    /// with a cofactor of degree at most one.
    pub fn from_polynomials(curve: BiquadraticCurve, a: Polynomial, c: Polynomial, d: Polynomial) -> Result<Self> {
        let x2 = curve.x_view()[2].clone();
        let split = |p: &Polynomial, name: &str| -> Result<(Scalar, Scalar)> {
            let (q, r) = p.div_rem(&x2)?;
            if r.scale() > FACTOR_RTOL * p.scale().max(1.0) {
                return Err(Error::FactorMissing(format!("{name} is not divisible by X_2")));
            }
            if q.degree() > 1 {
                return Err(Error::DegreeMismatch(format!("{name}/X_2 has degree {} > 1", q.degree())));
            }
            Ok((q.coeff(1), q.coeff(0)))
        };
        let bg = split(&c, "c")?;
        let de = split(&d, "d")?;
        Self::new(curve, a, bg, de)
    }

    pub fn mode(&self) -> Mode {
        if self.beta == zero() && self.gamma == zero() {
            Mode::Logarithmic
        } else {
            Mode::General
        }
    }

    /// `max(‖a‖, ‖c‖, ‖d‖) · max(1, |z|)³`.
    pub fn scale_at(&self, z: Scalar) -> f64 {
        let s = self.a.scale().max(self.c.scale()).max(self.d.scale());
        s * z.norm().max(1.0).powi(3)
    }

    /// `a(x)/(y_0 − y_{−1}) + c(x)/2`, zero at `x_{−1}`.
    pub fn xm1_residual(&self, x: Scalar, y_m1: Scalar, y_0: Scalar) -> Scalar {
        self.a.eval(x) / (y_0 - y_m1) + self.c.eval(x) * 0.5
    }

    /// `a(x)/(y'_1 − y'_0) − c(x)/2`, zero at `x'_0`.
    pub fn xp0_residual(&self, x: Scalar, y_p0: Scalar, y_p1: Scalar) -> Scalar {
        self.a.eval(x) / (y_p1 - y_p0) - self.c.eval(x) * 0.5
    }

    /// Candidate abscissae for `x_{−1}` and `x'_0`, sorted by `(re, im)`.
    ///
    /// In general mode both conditions square to `4a² = (βx + γ)² P`, and each
    /// root satisfies one of them for either ordering of the root pair, so the
    /// same list serves both. In logarithmic mode the conditions are `a = 0`.
    pub fn special_candidates(&self) -> Result<Vec<Scalar>> {
        let raw = match self.mode() {
            Mode::Logarithmic => {
                if self.a.degree() == 0 {
                    return Err(Error::NoSpecialPoint("a is constant".into()));
                }
                self.a.roots()?
            }
            Mode::General => {
                let lin = Polynomial::new(vec![self.gamma, self.beta]);
                let sq = &(&self.a * &self.a).scale_by(Scalar::new(4.0, 0.0))
                    - &(&(&lin * &lin) * self.curve.discriminant_p());
                if sq.degree() == 0 {
                    return Err(Error::NoSpecialPoint("4a^2 - (βx+γ)^2 P has no roots".into()));
                }
                sq.roots()?
            }
        };
        let p = self.curve.discriminant_p();
        let x2 = &self.curve.x_view()[2];
        let mut out = Vec::new();
        for x in raw {
            if x2.eval(x).norm() <= 1e-12 * x2.abs_scale_at(x) {
                log::warn!("special candidate {x} dropped: X_2 vanishes");
                continue;
            }
            if p.eval(x).norm() <= 1e-12 * p.abs_scale_at(x) {
                log::warn!("special candidate {x} dropped: branch point");
                continue;
            }
            if self.mode() == Mode::General {
                let lhs = self.a.eval(x) * 2.0;
                let rhs = (self.beta * x + self.gamma) * p.eval(x).sqrt();
                let tol = SPECIAL_RTOL * (lhs.norm() + rhs.norm()).max(f64::MIN_POSITIVE);
                if (lhs - rhs).norm() > tol && (lhs + rhs).norm() > tol {
                    log::warn!("special candidate {x} dropped: fails both sign choices");
                    continue;
                }
            }
            out.push(x);
        }
        out.sort_by(|u, v| u.re.total_cmp(&v.re).then(u.im.total_cmp(&v.im)));
        Ok(out)
    }
}

/// `a f(φ) + b f(ψ) + c = 0` rewritten as `α 𝒟f = β (f(φ) + f(ψ)) + γ` with
/// `α = α_half · (ψ − φ)`; `(ψ − φ)² = P/X_2²` keeps `α` out of the
/// polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricForm {
    /// `(b − a)/2`.
    pub alpha_half: Polynomial,
    /// `−(a + b)/2`.
    pub beta: Polynomial,
    /// `−c`.
    pub gamma: Polynomial,
}

pub fn convert_equation_form(a: &Polynomial, b: &Polynomial, c: &Polynomial) -> SymmetricForm {
    let half = Scalar::new(0.5, 0.0);
    SymmetricForm {
        alpha_half: (b - a).scale_by(half),
        beta: (-&(a + b)).scale_by(half),
        gamma: -c,
    }
}

impl SymmetricForm {
    /// `f(ψ)` from `f(φ)` at the abscissa of `pair`.
    pub fn solve_second(&self, pair: &RootPair, f_first: Scalar) -> Result<Scalar> {
        let x = pair.at;
        let ah = self.alpha_half.eval(x);
        let b = self.beta.eval(x);
        let den = ah - b;
        if den.norm() == 0.0 {
            return Err(Error::HitSingularLattice { index: 0 });
        }
        Ok(((ah + b) * f_first + self.gamma.eval(x)) / den)
    }
}

/// How to choose one special point among the candidates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpecialSelect {
    /// Position in the candidate list sorted by `(re, im)`.
    Index(usize),
    Nearest(Scalar),
}

impl SpecialSelect {
    fn pick(&self, candidates: &[Scalar]) -> Result<usize> {
        match *self {
            SpecialSelect::Index(k) if k < candidates.len() => Ok(k),
            SpecialSelect::Index(k) => Err(Error::NoSpecialPoint(format!(
                "index {k} out of range ({} candidates)",
                candidates.len()
            ))),
            SpecialSelect::Nearest(z) => candidates
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
                .map(|(i, _)| i)
                .ok_or_else(|| Error::NoSpecialPoint("no candidates".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpecialOptions {
    pub m1: SpecialSelect,
    pub p0: SpecialSelect,
    /// Logarithmic mode only: `y_{−1}` is the root at `x_{−1}` nearest this.
    pub y_m1_hint: Option<Scalar>,
    /// Logarithmic mode only: `y'_0` is the root at `x'_0` nearest this.
    pub y_p0_hint: Option<Scalar>,
}

impl Default for SpecialOptions {
    fn default() -> Self {
        SpecialOptions {
            m1: SpecialSelect::Index(0),
            p0: SpecialSelect::Index(1),
            y_m1_hint: None,
            y_p0_hint: None,
        }
    }
}

/// The two special abscissae with the orderings of their root pairs and the
/// residuals of their defining conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecialPoints {
    pub x_m1: Scalar,
    pub y_m1: Scalar,
    pub y_0: Scalar,
    pub x_p0: Scalar,
    pub y_p0: Scalar,
    pub y_p1: Scalar,
    /// `a/(y_0 − y_{−1}) + c/2` at `x_{−1}`.
    pub cert_m1: Scalar,
    /// `a/(y'_1 − y'_0) − c/2` at `x'_0`.
    pub cert_p0: Scalar,
    pub candidates: Vec<Scalar>,
}

pub fn locate_special_points(eq: &DifferenceEquation, opts: &SpecialOptions) -> Result<SpecialPoints> {
    let candidates = eq.special_candidates()?;
    if candidates.is_empty() {
        return Err(Error::NoSpecialPoint("no candidate passes back-substitution".into()));
    }
    let im = opts.m1.pick(&candidates)?;
    let ip = opts.p0.pick(&candidates)?;
    if im == ip {
        return Err(Error::NoSpecialPoint(
            "x_-1 and x'_0 must be different candidates".into(),
        ));
    }
    let (x_m1, x_p0) = (candidates[im], candidates[ip]);
    let rm = eq.curve.y_roots(x_m1, opts.y_m1_hint)?;
    let rp = eq.curve.y_roots(x_p0, opts.y_p0_hint)?;
    let ((y_m1, y_0), (y_p0, y_p1)) = match eq.mode() {
        Mode::Logarithmic => {
            let scale = eq.scale_at(x_m1);
            if eq.d.eval(x_m1).norm() > SPECIAL_RTOL * scale {
                return Err(Error::NoSpecialPoint(
                    "logarithmic mode needs d(x_-1) = 0, i.e. δ x_-1 + ε = 0".into(),
                ));
            }
            ((rm.first, rm.second), (rp.first, rp.second))
        }
        Mode::General => {
            let order = |pair: RootPair, res: &dyn Fn(Scalar, Scalar) -> Scalar, name: &str| {
                let (a, b) = (res(pair.first, pair.second), res(pair.second, pair.first));
                let (best, other, ord) = if a.norm() <= b.norm() {
                    (a, b, (pair.first, pair.second))
                } else {
                    (b, a, (pair.second, pair.first))
                };
                // the wrong ordering misses by |c|, so a relative test is safe
                if best.norm() > SPECIAL_RTOL * other.norm().max(f64::MIN_POSITIVE) {
                    return Err(Error::BranchAssignmentFailed(format!(
                        "{name}: residual {:e} under either ordering",
                        best.norm()
                    )));
                }
                Ok(ord)
            };
            (
                order(rm, &|u, v| eq.xm1_residual(x_m1, u, v), "x_-1")?,
                order(rp, &|u, v| eq.xp0_residual(x_p0, u, v), "x'_0")?,
            )
        }
    };
    Ok(SpecialPoints {
        x_m1,
        y_m1,
        y_0,
        x_p0,
        y_p0,
        y_p1,
        cert_m1: eq.xm1_residual(x_m1, y_m1, y_0),
        cert_p0: eq.xp0_residual(x_p0, y_p0, y_p1),
        candidates,
    })
}

/// Node lattice seeded with `(x_{−1}, y_{−1})` at index −1, pole lattice with
/// `(x'_0, y'_0)` at index 0, both materialised for terms up to `n`.
pub fn build_lattices(eq: &DifferenceEquation, sp: &SpecialPoints, n: usize) -> Result<BasisPair> {
    let unprimed = LatticeSpec::new(eq.curve.clone(), sp.x_m1, sp.y_m1)?.at_index(-1);
    let primed = LatticeSpec::new(eq.curve.clone(), sp.x_p0, sp.y_p0)?;
    let mut pair = BasisPair::new(LatticePair::new(unprimed), LatticePair::new(primed))?;
    pair.extend_to(n + 1)?;
    let (y0, yp1) = (pair.y(0)?, pair.yp(1)?);
    if (y0 - sp.y_0).norm() > 1e-9 * (1.0 + y0.norm()) || (yp1 - sp.y_p1).norm() > 1e-9 * (1.0 + yp1.norm()) {
        return Err(Error::BranchAssignmentFailed(
            "lattice step does not reproduce the chosen root ordering".into(),
        ));
    }
    Ok(pair)
}

/// `A_k = a(x_k) − c(x_k)(y_{k+1} − y_k)/2`.
fn a_node(eq: &DifferenceEquation, pair: &BasisPair, k: i64) -> Result<Scalar> {
    let x = pair.x(k)?;
    Ok(eq.a.eval(x) - eq.c.eval(x) * (pair.y(k + 1)? - pair.y(k)?) * 0.5)
}

/// `A'_k = a(x'_k) + c(x'_k)(y'_{k+1} − y'_k)/2`.
fn a_pole(eq: &DifferenceEquation, pair: &BasisPair, k: i64) -> Result<Scalar> {
    let x = pair.xp(k)?;
    Ok(eq.a.eval(x) + eq.c.eval(x) * (pair.yp(k + 1)? - pair.yp(k)?) * 0.5)
}

/// `c_0 = −(δ x_{−1} + ε)/(β x_{−1} + γ)` (general mode).
pub fn c0_general(eq: &DifferenceEquation, x_m1: Scalar) -> Result<Scalar> {
    let den = eq.beta * x_m1 + eq.gamma;
    if den.norm() <= 1e-14 * (eq.beta.norm() * x_m1.norm() + eq.gamma.norm()) {
        return Err(Error::MethodDegenerate("β x_-1 + γ vanishes".into()));
    }
    Ok(-(eq.delta * x_m1 + eq.epsilon) / den)
}

/// Both expressions for `c_1`: through `C_1`, and with `C_1` eliminated.
pub fn c1_routes(eq: &DifferenceEquation, pair: &BasisPair, c0: Scalar, c1_const: Scalar) -> Result<(Scalar, Scalar)> {
    let (xm1, xp0) = (pair.x(-1)?, pair.xp(0)?);
    let x0 = pair.x(0)?;
    let a0 = a_node(eq, pair, 0)?;
    let lead = (eq.delta + eq.beta * c0) * (x0 - xm1);
    let r1 = lead * (x0 - xp0) * (x0 - pair.xp(1)?) / (c1_const * a0);
    let r2 = lead * (pair.y(1)? - pair.yp(1)?) * eq.curve.x2(x0) / a0;
    Ok((r1, r2))
}

/// `c_{n+1} = −c_n ξ_n / η_{n+1}` for `n = 1..N−1`, starting from `c_0, c_1`.
pub fn ratio_route(eq: &DifferenceEquation, pair: &BasisPair, cn: &[Scalar], c0: Scalar, c1: Scalar, n_max: usize) -> Result<Vec<Scalar>> {
    let (xm1, xp0) = (pair.x(-1)?, pair.xp(0)?);
    let mut out = vec![c0];
    if n_max >= 1 {
        out.push(c1);
    }
    for n in 1..n_max {
        let ni = n as i64;
        let xpn = pair.xp(ni)?;
        let xi = cn[n] * a_pole(eq, pair, ni)? / ((xpn - xm1) * (xpn - xp0) * (xpn - pair.x(ni - 1)?));
        let xn = pair.x(ni)?;
        let eta = cn[n + 1] * a_node(eq, pair, ni)? / ((xn - xm1) * (xn - xp0) * (xn - pair.xp(ni + 1)?));
        let next = -out[n] * xi / eta;
        if eta.norm() == 0.0 || !next.is_finite() {
            return Err(Error::SmallDivisor {
                index: n + 1,
                magnitude: eta.norm(),
            });
        }
        out.push(next);
    }
    Ok(out)
}

/// The `C_n`-free product for `c_n`, `n ≥ 1`. With `zeta` given the ratio
/// factors take their logarithmic-mode form `(x'_k − ζ)/(x_k − ζ)`.
pub fn closed_product(eq: &DifferenceEquation, pair: &BasisPair, c1: Scalar, c1_const: Scalar, n: usize, zeta: Option<Scalar>) -> Result<Scalar> {
    if n == 0 {
        return Err(Error::InvalidRange("the product form starts at n = 1".into()));
    }
    let ni = n as i64;
    let (xm1, ym1, xp0) = (pair.x(-1)?, pair.y(-1)?, pair.xp(0)?);
    let mut v = c1 * c1_const * (pair.xp(ni)? - pair.x(ni - 1)?) / (pair.xp(1)? - pair.x(0)?);
    v *= eq.curve.x2(xm1);
    for k in 0..=ni - 2 {
        v *= xm1 - pair.x(k)?;
    }
    for k in 1..=ni {
        v *= ym1 - pair.yp(k)?;
    }
    for k in 0..=ni {
        v /= xm1 - pair.xp(k)?;
    }
    for k in 1..ni {
        v /= ym1 - pair.y(k)?;
    }
    for k in 1..ni {
        let (xk, xpk) = (pair.x(k)?, pair.xp(k)?);
        v *= match zeta {
            Some(z) => (xpk - z) / (xk - z),
            None => {
                a_pole(eq, pair, k)? / a_node(eq, pair, k)? * (xk - xm1) * (xk - xp0) / ((xpk - xm1) * (xpk - xp0))
            }
        };
    }
    Ok(v)
}

/// `f(y_0..=y_K)` by stepping `f(y_{k+1}) = ([a/h + c/2] f(y_k) + d)/(a/h − c/2)`
/// at `x_k` with `h = y_{k+1} − y_k`.
pub fn stepwise_oracle(eq: &DifferenceEquation, pair: &BasisPair, f0: Scalar, k_max: usize) -> Result<Vec<Scalar>> {
    let mut f = vec![f0];
    for k in 0..k_max {
        let ki = k as i64;
        let x = pair.x(ki)?;
        let h = pair.y(ki + 1)? - pair.y(ki)?;
        let (ah, c2) = (eq.a.eval(x) / h, eq.c.eval(x) * 0.5);
        let den = ah - c2;
        if den.norm() <= 1e-13 * (ah.norm() + c2.norm()) || !den.is_finite() {
            return Err(Error::HitSingularLattice { index: k });
        }
        let prev = f[k];
        f.push(((ah + c2) * prev + eq.d.eval(x)) / den);
    }
    Ok(f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions {
    pub special: SpecialOptions,
    pub n: usize,
    /// The free constant `f(y_0)` in logarithmic mode.
    pub c0_free: Option<Scalar>,
    pub smalldiv_threshold: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            special: SpecialOptions::default(),
            n: 10,
            c0_free: None,
            smalldiv_threshold: SMALLDIV_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `|c_n|`.
    pub magnitudes: Vec<f64>,
    /// The two `c_1` expressions.
    pub c1_routes: (Scalar, Scalar),
    /// Coefficients from the route not used as primary.
    pub alternate: Vec<Scalar>,
    /// Relative gap between primary and alternate per index.
    pub route_gap: Vec<f64>,
    /// `(n, |y_{−1} − y_{n−1}|)` for near-returns.
    pub smalldiv_flags: Vec<(usize, f64)>,
}

/// Interpolation against the stepwise oracle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InterpolationReport {
    /// `|S_N(y_j) − f(y_j)|/(1 + |f(y_j)|)` for `j = 0..`.
    pub errors: Vec<f64>,
    pub max_error: f64,
    /// Index where the oracle hit a pole lattice point, if any.
    pub singular_at: Option<usize>,
}

/// Coefficients `c_0..=c_N` with everything needed to evaluate and check them.
#[derive(Clone, Debug)]
pub struct ExpansionSolution {
    pub eq: DifferenceEquation,
    pub pair: BasisPair,
    pub special: SpecialPoints,
    pub mode: Mode,
    pub c0_free: Option<Scalar>,
    pub cn: Vec<Scalar>,
    pub coeffs: Vec<Scalar>,
    pub zeta: Option<Scalar>,
    pub diagnostics: Diagnostics,
}

impl ExpansionSolution {
    pub fn solve(eq: &DifferenceEquation, opts: &SolveOptions) -> Result<Self> {
        let mode = eq.mode();
        let n = opts.n;
        let c0_free = match (mode, opts.c0_free) {
            (Mode::Logarithmic, None) => return Err(Error::MissingField("c0_free".into())),
            (Mode::Logarithmic, Some(v)) => Some(v),
            (Mode::General, _) => None,
        };
        let zeta = match mode {
            Mode::Logarithmic if eq.a.degree() != 3 => {
                return Err(Error::DegreeMismatch(format!(
                    "logarithmic mode needs deg a = 3, got {}",
                    eq.a.degree()
                )))
            }
            _ => None,
        };
        let special = locate_special_points(eq, &opts.special)?;
        let pair = build_lattices(eq, &special, n)?;
        let zeta = zeta.or_else(|| {
            (mode == Mode::Logarithmic).then(|| -eq.a.coeff(2) / eq.a.coeff(3) - special.x_m1 - special.x_p0)
        });
        let cn = pair.cn_table(n + 1)?;
        let c0 = match mode {
            Mode::General => c0_general(eq, special.x_m1)?,
            Mode::Logarithmic => c0_free.expect("checked above"),
        };
        let c1_routes = if n >= 1 { c1_routes(eq, &pair, c0, cn[1])? } else { (zero(), zero()) };
        if n >= 1 && rel_gap(c1_routes.0, c1_routes.1) > C1_RTOL {
            return Err(Error::InternalInconsistency(format!(
                "c_1 expressions disagree: {} vs {}",
                c1_routes.0, c1_routes.1
            )));
        }
        let c1 = c1_routes.0;
        let ratio = ratio_route(eq, &pair, &cn, c0, c1, n)?;
        let mut closed = vec![c0];
        for k in 1..=n {
            closed.push(closed_product(eq, &pair, c1, cn[1], k, zeta)?);
        }
        let (coeffs, alternate) = match mode {
            Mode::General => (ratio, closed),
            Mode::Logarithmic => (closed, ratio),
        };
        let route_gap = coeffs.iter().zip(&alternate).map(|(a, b)| rel_gap(*a, *b)).collect();
        let smalldiv_flags = detect_small_divisors(&pair, n, opts.smalldiv_threshold)?;
        let diagnostics = Diagnostics {
            magnitudes: coeffs.iter().map(|c| c.norm()).collect(),
            c1_routes,
            alternate,
            route_gap,
            smalldiv_flags,
        };
        Ok(ExpansionSolution {
            eq: eq.clone(),
            pair,
            special,
            mode,
            c0_free,
            cn,
            coeffs,
            zeta,
            diagnostics,
        })
    }

    pub fn n(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `f(y_0)` used by the oracle.
    pub fn f0(&self) -> Scalar {
        self.coeffs[0]
    }

    /// The same solution with `c_index` multiplied by `factor`.
    pub fn corrupted(&self, index: usize, factor: Scalar) -> Self {
        let mut s = self.clone();
        if let Some(c) = s.coeffs.get_mut(index) {
            *c *= factor;
        }
        s
    }

    /// `c_k 𝒴_k(z)` for `k = 0..=N`, built with a running product.
    pub fn terms(&self, n: usize, z: Scalar) -> Result<Vec<Scalar>> {
        if n > self.n() {
            return Err(Error::InvalidRange(format!("N = {n} exceeds {} computed coefficients", self.n())));
        }
        let mut basis = one();
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            if k > 0 {
                let ki = k as i64;
                let pole = self.pair.yp(ki)?;
                let den = z - pole;
                if den.norm() <= f64::EPSILON * (z.norm() + pole.norm()) {
                    return Err(Error::PoleEvaluation(z));
                }
                basis *= (z - self.pair.y(ki - 1)?) / den;
            }
            out.push(self.coeffs[k] * basis);
        }
        Ok(out)
    }

    /// `S_N(z) = Σ_{k≤N} c_k 𝒴_k(z)`.
    pub fn partial_sum(&self, n: usize, z: Scalar) -> Result<Scalar> {
        Ok(self.terms(n, z)?.iter().sum())
    }

    /// `a 𝒟S_N − c ℳS_N − d` at `z`.
    pub fn residual(&self, n: usize, z: Scalar) -> Result<Scalar> {
        let roots = self.eq.curve.y_roots(z, None)?;
        let s = |y| self.partial_sum(n, y);
        let d = divided_difference(&roots, s)?;
        let m = mean(&roots, s)?;
        Ok(self.eq.a.eval(z) * d - self.eq.c.eval(z) * m - self.eq.d.eval(z))
    }

    pub fn oracle(&self, k: usize) -> Result<Vec<Scalar>> {
        stepwise_oracle(&self.eq, &self.pair, self.f0(), k)
    }

    pub fn verify_interpolation(&self, n: usize) -> Result<InterpolationReport> {
        let (oracle, singular_at) = match stepwise_oracle(&self.eq, &self.pair, self.f0_uncorrupted(), n) {
            Ok(v) => (v, None),
            Err(Error::HitSingularLattice { index }) => {
                (stepwise_oracle(&self.eq, &self.pair, self.f0_uncorrupted(), index)?, Some(index))
            }
            Err(e) => return Err(e),
        };
        let mut errors = Vec::with_capacity(oracle.len());
        for (j, f) in oracle.iter().enumerate() {
            let s = self.partial_sum(n, self.pair.y(j as i64)?)?;
            errors.push((s - f).norm() / (1.0 + f.norm()));
        }
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        Ok(InterpolationReport {
            errors,
            max_error,
            singular_at,
        })
    }

    /// The oracle seed from the equation, independent of stored coefficients.
    fn f0_uncorrupted(&self) -> Scalar {
        match self.mode {
            Mode::General => c0_general(&self.eq, self.special.x_m1).unwrap_or(self.coeffs[0]),
            Mode::Logarithmic => self.c0_free.unwrap_or(self.coeffs[0]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::re;

    fn generic_curve() -> BiquadraticCurve {
        BiquadraticCurve::from_real([[0.3, -1.1, 1.0], [0.7, 0.4, -0.6], [1.2, 0.5, 0.9]]).unwrap()
    }

    fn general_eq() -> DifferenceEquation {
        let a = Polynomial::new(vec![
            Scalar::new(0.2, -0.4),
            Scalar::new(-0.7, 0.1),
            Scalar::new(0.5, 0.3),
            Scalar::new(0.9, -0.6),
        ]);
        DifferenceEquation::new(generic_curve(), a, (re(0.7), re(-0.3)), (re(0.4), re(0.9))).unwrap()
    }

    #[test]
    fn factor_checks() {
        let c = generic_curve();
        let x2 = c.x_view()[2].clone();
        let a = Polynomial::from_real(&[1.0, 0.0, 1.0]);
        let cpoly = &x2 * &Polynomial::from_real(&[1.0, 2.0]);
        let eq = DifferenceEquation::from_polynomials(c.clone(), a.clone(), cpoly.clone(), Polynomial::zero()).unwrap();
        assert_eq!((eq.beta, eq.gamma), (re(2.0), re(1.0)));
        let bad = &cpoly + &Polynomial::one();
        assert!(matches!(
            DifferenceEquation::from_polynomials(c.clone(), a.clone(), bad, Polynomial::zero()),
            Err(Error::FactorMissing(_))
        ));
        let big = &x2 * &Polynomial::from_real(&[1.0, 0.0, 1.0]);
        assert!(matches!(
            DifferenceEquation::from_polynomials(c.clone(), a, big, Polynomial::zero()),
            Err(Error::DegreeMismatch(_))
        ));
        assert!(matches!(
            DifferenceEquation::new(c, Polynomial::from_real(&[1.0; 5]), (re(1.0), re(0.0)), (re(0.0), re(0.0))),
            Err(Error::DegreeMismatch(_))
        ));
    }

    #[test]
    fn conversion_forms() {
        let one = Polynomial::one();
        let f = convert_equation_form(&-&one, &one, &Polynomial::zero());
        assert!(f.beta.is_zero());
        let h = Polynomial::constant(re(-0.5));
        let f = convert_equation_form(&h, &h, &Polynomial::from_real(&[1.0]));
        assert!(f.alpha_half.is_zero());
        // random cubics on the linear curve: same f(ψ) from f(φ)
        let c = BiquadraticCurve::linear(re(1.0), re(0.0)).unwrap();
        let a = Polynomial::from_real(&[0.3, -1.0, 0.2, 0.5]);
        let b = Polynomial::from_real(&[1.1, 0.4, -0.3, 0.7]);
        let cc = Polynomial::from_real(&[0.2, 0.1]);
        let form = convert_equation_form(&a, &b, &cc);
        for k in 0..10 {
            let x = Scalar::new(0.3 * k as f64 - 1.0, 0.2);
            let pair = c.y_roots(x, None).unwrap();
            let fphi = Scalar::new(0.5, -0.1 * k as f64);
            let direct = -(a.eval(x) * fphi + cc.eval(x)) / b.eval(x);
            assert!((form.solve_second(&pair, fphi).unwrap() - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn special_points_certificates() {
        let eq = general_eq();
        let sp = locate_special_points(&eq, &SpecialOptions::default()).unwrap();
        assert!(sp.candidates.len() >= 2);
        assert!(sp.cert_m1.norm() <= 1e-9 * eq.scale_at(sp.x_m1));
        assert!(sp.cert_p0.norm() <= 1e-9 * eq.scale_at(sp.x_p0));
        // swapped ordering at x'_0 flips the sign of a/(y'_1 − y'_0)
        let swapped = eq.xp0_residual(sp.x_p0, sp.y_p1, sp.y_p0);
        let c_half = eq.c.eval(sp.x_p0) * 0.5;
        assert!((swapped + c_half * 2.0).norm() < 1e-9 * c_half.norm().max(1.0));
    }

    #[test]
    fn special_points_ignore_d() {
        let eq = general_eq();
        let mut eq2 = eq.clone();
        eq2 = DifferenceEquation::new(eq2.curve, eq2.a, (eq2.beta, eq2.gamma), (re(5.0), re(-2.0))).unwrap();
        let s1 = locate_special_points(&eq, &SpecialOptions::default()).unwrap();
        let s2 = locate_special_points(&eq2, &SpecialOptions::default()).unwrap();
        assert_eq!(s1.candidates, s2.candidates);
    }

    #[test]
    fn same_candidate_rejected() {
        let opts = SpecialOptions {
            m1: SpecialSelect::Index(0),
            p0: SpecialSelect::Index(0),
            ..Default::default()
        };
        assert!(matches!(locate_special_points(&general_eq(), &opts), Err(Error::NoSpecialPoint(_))));
    }

    #[test]
    fn general_solution_interpolates() {
        let eq = general_eq();
        let sol = ExpansionSolution::solve(&eq, &SolveOptions::default()).unwrap();
        assert!((sol.coeffs[0] - c0_general(&eq, sol.special.x_m1).unwrap()).norm() < 1e-15);
        let rep = sol.verify_interpolation(10).unwrap();
        assert!(rep.max_error <= 1e-7, "{rep:?}");
        for (n, gap) in sol.diagnostics.route_gap.iter().enumerate().skip(1) {
            assert!(*gap <= 1e-7, "n={n} gap={gap}");
        }
        for j in 0..10 {
            let x = sol.pair.x(j).unwrap();
            assert!(sol.residual(10, x).unwrap().norm() <= 1e-7 * eq.scale_at(x));
        }
    }

    #[test]
    fn first_oracle_step_matches_partial_sum() {
        let sol = ExpansionSolution::solve(&general_eq(), &SolveOptions::default()).unwrap();
        let f = sol.oracle(1).unwrap();
        let s1 = sol.partial_sum(1, sol.pair.y(1).unwrap()).unwrap();
        assert!((f[1] - s1).norm() <= 1e-10 * (1.0 + f[1].norm()));
        assert_eq!(sol.partial_sum(0, re(12.0)).unwrap(), sol.coeffs[0]);
        assert!((sol.partial_sum(10, sol.pair.y(0).unwrap()).unwrap() - sol.coeffs[0]).norm() < 1e-15);
    }

    #[test]
    fn homogeneous_right_side_gives_zero() {
        let eq = general_eq();
        let eq = DifferenceEquation::new(eq.curve, eq.a, (eq.beta, eq.gamma), (re(0.0), re(0.0))).unwrap();
        let sol = ExpansionSolution::solve(&eq, &SolveOptions::default()).unwrap();
        assert!(sol.coeffs.iter().all(|c| *c == zero()));
        assert!(sol.oracle(5).unwrap().iter().all(|f| *f == zero()));
        assert_eq!(sol.residual(5, Scalar::new(0.3, 0.1)).unwrap(), zero());
    }

    #[test]
    fn corrupted_coefficient_localises() {
        let sol = ExpansionSolution::solve(&general_eq(), &SolveOptions::default()).unwrap();
        let bad = sol.corrupted(5, re(1.01));
        let rep = bad.verify_interpolation(8).unwrap();
        for (j, e) in rep.errors.iter().enumerate() {
            if j < 5 {
                assert!(*e <= 1e-7, "j={j} e={e}");
            } else {
                assert!(*e > 1e-6, "j={j} e={e}");
            }
        }
    }

    #[test]
    fn log_mode_needs_seed_constant() {
        let c = generic_curve();
        let a = Polynomial::from_roots(one(), &[Scalar::new(0.3, 0.2), Scalar::new(-0.4, 0.5), Scalar::new(1.1, -0.2)]);
        let eq = DifferenceEquation::logarithmic(c, a, re(0.8), -re(0.8) * Scalar::new(-0.4, 0.5)).unwrap();
        assert_eq!(eq.mode(), Mode::Logarithmic);
        assert_eq!(
            ExpansionSolution::solve(&eq, &SolveOptions::default()).unwrap_err(),
            Error::MissingField("c0_free".into())
        );
        let opts = SolveOptions {
            c0_free: Some(re(0.5)),
            special: SpecialOptions {
                m1: SpecialSelect::Nearest(Scalar::new(-0.4, 0.5)),
                p0: SpecialSelect::Nearest(Scalar::new(0.3, 0.2)),
                ..Default::default()
            },
            ..Default::default()
        };
        let sol = ExpansionSolution::solve(&eq, &opts).unwrap();
        assert!(sol.verify_interpolation(8).unwrap().max_error <= 1e-7);
        assert!(sol.diagnostics.route_gap.iter().all(|g| *g <= 1e-8));
        assert!((sol.zeta.unwrap() - Scalar::new(1.1, -0.2)).norm() < 1e-12);
    }

    #[test]
    fn log_mode_zero_forcing() {
        let c = generic_curve();
        let a = Polynomial::from_roots(one(), &[Scalar::new(0.3, 0.2), Scalar::new(-0.4, 0.5), Scalar::new(1.1, -0.2)]);
        let eq = DifferenceEquation::logarithmic(c, a, zero(), zero()).unwrap();
        let opts = SolveOptions {
            c0_free: Some(re(2.0)),
            ..Default::default()
        };
        let sol = ExpansionSolution::solve(&eq, &opts).unwrap();
        assert_eq!(sol.coeffs[0], re(2.0));
        assert!(sol.coeffs[1..].iter().all(|c| c.norm() == 0.0));
    }
}

//! Biquadratic curves `F(x, y) = Σ_{i,j≤2} c_ij x^i y^j = 0`.
//!
//! The same curve is read two ways: as a quadratic in `y` with polynomial
//! coefficients `X_0(x) + X_1(x) y + X_2(x) y²`, and as a quadratic in `x`
//! with coefficients `Y_0(y) + Y_1(y) x + Y_2(y) x²`. The discriminant
//! `P = X_1² − 4 X_0 X_2` has degree at most four.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{quadratic_roots, Polynomial};
use crate::Scalar;

/// `|X_2(x)|` below this fraction of `Σ|X_2,i||x|^i` means one root went to infinity.
pub const LEADING_RTOL: f64 = 1e-12;
/// `|∂F/∂y|` below this fraction of the residual scale is a vertical tangent.
pub const TANGENT_RTOL: f64 = 1e-12;
/// Roots closer than this (relative) are treated as a branch point.
pub const BRANCH_RTOL: f64 = 1e-13;
/// Accepted `|F|/scale` for a fitted curve.
pub const FIT_RTOL: f64 = 1e-10;

type Grid = [[Scalar; 3]; 3];

/// The coefficient grid `c[i][j]` multiplying `x^i y^j`, with its derived
/// quadratic views cached.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Grid", into = "Grid")]
pub struct BiquadraticCurve {
    c: Grid,
    xv: [Polynomial; 3],
    yv: [Polynomial; 3],
    p: Polynomial,
}

impl TryFrom<Grid> for BiquadraticCurve {
    type Error = Error;
    fn try_from(c: Grid) -> Result<Self> {
        BiquadraticCurve::new(c)
    }
}

impl From<BiquadraticCurve> for Grid {
    fn from(curve: BiquadraticCurve) -> Grid {
        curve.c
    }
}

/// The two roots of one of the quadratic views at a fixed abscissa.
///
/// `second − first = sqrt_p / lead` where `lead` is the leading coefficient of
/// the view at `at`, so `sqrt_p` records the square-root branch that produced
/// the ordering.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootPair {
    pub first: Scalar,
    pub second: Scalar,
    pub at: Scalar,
    pub sqrt_p: Scalar,
}

impl RootPair {
    pub fn swapped(self) -> Self {
        RootPair {
            first: self.second,
            second: self.first,
            at: self.at,
            sqrt_p: -self.sqrt_p,
        }
    }

    /// The member of the pair that is not (nearest to) `known`.
    pub fn other(&self, known: Scalar) -> Scalar {
        if (self.first - known).norm() <= (self.second - known).norm() {
            self.second
        } else {
            self.first
        }
    }

    pub fn contains(&self, z: Scalar, tol: f64) -> bool {
        let s = 1.0 + z.norm();
        (self.first - z).norm() <= tol * s || (self.second - z).norm() <= tol * s
    }
}

impl BiquadraticCurve {
    pub fn new(c: Grid) -> Result<Self> {
        let xv = [0, 1, 2].map(|j| Polynomial::new((0..3).map(|i| c[i][j]).collect()));
        let yv = [0, 1, 2].map(|i| Polynomial::new((0..3).map(|j| c[i][j]).collect()));
        if xv[2].is_zero() {
            return Err(Error::InvalidCurve("X_2 vanishes identically".into()));
        }
        if yv[2].is_zero() {
            return Err(Error::InvalidCurve("Y_2 vanishes identically".into()));
        }
        let p = &(&xv[1] * &xv[1]) - &(&xv[0] * &xv[2]).scale_by(Scalar::new(4.0, 0.0));
        if p.is_zero() {
            return Err(Error::InvalidCurve(
                "P = X_1^2 - 4 X_0 X_2 vanishes identically (double curve)".into(),
            ));
        }
        Ok(BiquadraticCurve { c, xv, yv, p })
    }

    pub fn from_real(c: [[f64; 3]; 3]) -> Result<Self> {
        Self::new(c.map(|row| row.map(|v| Scalar::new(v, 0.0))))
    }

    /// `(y − x − s)(y − x − s − h)` with `s = y0 − x0`: lattice `x_n = x0 + n h`.
    pub fn linear(h: Scalar, offset: Scalar) -> Result<Self> {
        // expand (y - x - s)(y - x - s - h)
        let s = offset;
        let one = Scalar::new(1.0, 0.0);
        let zero = Scalar::new(0.0, 0.0);
        let mut c = [[zero; 3]; 3];
        c[0][2] = one;
        c[1][1] = -one * 2.0;
        c[2][0] = one;
        c[0][1] = -(s * 2.0 + h);
        c[1][0] = s * 2.0 + h;
        c[0][0] = s * (s + h);
        Self::new(c)
    }

    /// `(y − x)(y − a − q(x − a))`: geometric lattice `x_n = y_n = a + b qⁿ`.
    pub fn geometric(a: Scalar, q: Scalar) -> Result<Self> {
        // (y - x)(y - q x - a(1 - q))
        let one = Scalar::new(1.0, 0.0);
        let zero = Scalar::new(0.0, 0.0);
        let k = a * (one - q);
        let mut c = [[zero; 3]; 3];
        c[0][2] = one;
        c[1][1] = -(one + q);
        c[2][0] = q;
        c[0][1] = -k;
        c[1][0] = k;
        Self::new(c)
    }

    /// Fits a curve through the given points by taking the null vector of the
    /// `m × 9` monomial matrix, normalised so its largest coefficient is one.
    pub fn fit(points: &[(Scalar, Scalar)]) -> Result<Self> {
        if points.len() < 9 {
            return Err(Error::CurveFit(format!(
                "need at least 9 points, got {}",
                points.len()
            )));
        }
        // rows are scaled to unit norm so large lattice values do not dominate
        let rows: Vec<Vec<Scalar>> = points
            .iter()
            .map(|&(x, y)| {
                let mut r = Vec::with_capacity(9);
                for i in 0..3 {
                    for j in 0..3 {
                        r.push(x.powu(i) * y.powu(j));
                    }
                }
                let n = r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                r.into_iter().map(|v| v / n).collect()
            })
            .collect();
        let m = DMatrix::from_fn(rows.len(), 9, |r, k| rows[r][k]);
        let svd = m.svd(false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::CurveFit("SVD did not converge".into()))?;
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
        let v: Vec<Scalar> = (0..9).map(|k| v_t[(idx, k)].conj()).collect();
        let big = v
            .iter()
            .copied()
            .fold(Scalar::new(0.0, 0.0), |a, b| if b.norm() > a.norm() { b } else { a });
        let mut c = [[Scalar::new(0.0, 0.0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let val = v[3 * i + j] / big;
                // clean rounding-level entries so degenerate views stay exact
                c[i][j] = if val.norm() < 1e-13 { Scalar::new(0.0, 0.0) } else { val };
            }
        }
        let curve = Self::new(c)?;
        let worst = points
            .iter()
            .map(|&(x, y)| curve.relative_residual(x, y))
            .fold(0.0, f64::max);
        if worst > FIT_RTOL {
            return Err(Error::CurveFit(format!(
                "fitted curve misses the points: max relative residual {worst:e}"
            )));
        }
        Ok(curve)
    }

    pub fn coefficients(&self) -> &Grid {
        &self.c
    }

    /// `(X_0, X_1, X_2)` with `X_j(x) = Σ_i c_ij x^i`.
    pub fn x_view(&self) -> &[Polynomial; 3] {
        &self.xv
    }

    /// `(Y_0, Y_1, Y_2)` with `Y_i(y) = Σ_j c_ij y^j`.
    pub fn y_view(&self) -> &[Polynomial; 3] {
        &self.yv
    }

    pub fn x2(&self, x: Scalar) -> Scalar {
        self.xv[2].eval(x)
    }

    pub fn y2(&self, y: Scalar) -> Scalar {
        self.yv[2].eval(y)
    }

    /// `P = X_1² − 4 X_0 X_2`.
    pub fn discriminant_p(&self) -> &Polynomial {
        &self.p
    }

    pub fn eval(&self, x: Scalar, y: Scalar) -> Scalar {
        self.xv[0].eval(x) + (self.xv[1].eval(x) + self.xv[2].eval(x) * y) * y
    }

    /// `Σ |c_ij| |x|^i |y|^j`: the magnitude `|F(x, y)|` is judged against.
    pub fn residual_scale(&self, x: Scalar, y: Scalar) -> f64 {
        let (ax, ay) = (x.norm(), y.norm());
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.c[i][j].norm() * ax.powi(i as i32) * ay.powi(j as i32);
            }
        }
        s
    }

    pub fn relative_residual(&self, x: Scalar, y: Scalar) -> f64 {
        let scale = self.residual_scale(x, y);
        if scale == 0.0 {
            0.0
        } else {
            self.eval(x, y).norm() / scale
        }
    }

    /// `(∂F/∂x, ∂F/∂y)`.
    pub fn gradient(&self, x: Scalar, y: Scalar) -> (Scalar, Scalar) {
        let fx = self.xv[0].derivative().eval(x)
            + (self.xv[1].derivative().eval(x) + self.xv[2].derivative().eval(x) * y) * y;
        let fy = self.xv[1].eval(x) + self.xv[2].eval(x) * y * 2.0;
        (fx, fy)
    }

    fn roots_of(view: &[Polynomial; 3], at: Scalar, hint: Option<Scalar>) -> Result<RootPair> {
        let lead = view[2].eval(at);
        if lead.norm() <= LEADING_RTOL * view[2].abs_scale_at(at) {
            return Err(Error::LeadingCoefficientVanishes(at));
        }
        let b = view[1].eval(at);
        let c = view[0].eval(at);
        let (first, second) = quadratic_roots(lead, b, c);
        let pair = RootPair {
            first,
            second,
            at,
            sqrt_p: (second - first) * lead,
        };
        Ok(match hint {
            Some(h) if (second - h).norm() < (first - h).norm() => pair.swapped(),
            _ => pair,
        })
    }

    /// The two roots `φ(x), ψ(x)` of `F(x, ·) = 0`. Without a hint the first
    /// root is `(−X_1 − √P)/(2X_2)` with the principal square root; with a hint
    /// the root nearer to it comes first.
    pub fn y_roots(&self, x: Scalar, hint: Option<Scalar>) -> Result<RootPair> {
        Self::roots_of(&self.xv, x, hint)
    }

    /// Mirror of [`Self::y_roots`]: the two roots of `F(·, y) = 0`.
    pub fn x_roots(&self, y: Scalar, hint: Option<Scalar>) -> Result<RootPair> {
        Self::roots_of(&self.yv, y, hint)
    }

    /// Second `y`-root at `x` given one root `y`, from `φ + ψ = −X_1/X_2`.
    pub fn y_complement(&self, x: Scalar, y: Scalar) -> Result<Scalar> {
        let lead = self.xv[2].eval(x);
        if lead.norm() <= LEADING_RTOL * self.xv[2].abs_scale_at(x) {
            return Err(Error::LeadingCoefficientVanishes(x));
        }
        Ok(-self.xv[1].eval(x) / lead - y)
    }

    /// Second `x`-root at `y` given one root `x`.
    pub fn x_complement(&self, y: Scalar, x: Scalar) -> Result<Scalar> {
        let lead = self.yv[2].eval(y);
        if lead.norm() <= LEADING_RTOL * self.yv[2].abs_scale_at(y) {
            return Err(Error::LeadingCoefficientVanishes(y));
        }
        Ok(-self.yv[1].eval(y) / lead - x)
    }

    /// Slope `dy/dx = −F_x/F_y` of the branch through `(x, y)`.
    pub fn implicit_dy_dx(&self, x: Scalar, y: Scalar) -> Result<Scalar> {
        let (fx, fy) = self.gradient(x, y);
        if fy.norm() <= TANGENT_RTOL * self.residual_scale(x, y).max(f64::MIN_POSITIVE) {
            return Err(Error::VerticalTangent { x, y });
        }
        Ok(-fx / fy)
    }

    /// True when the two `y`-roots at `x` coincide.
    pub fn is_branch_point(&self, pair: &RootPair) -> bool {
        let s = 1.0_f64.max(pair.first.norm()).max(pair.second.norm());
        (pair.second - pair.first).norm() <= BRANCH_RTOL * s
    }
}

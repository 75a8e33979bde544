//! Elliptic lattices: the staircase `(x_n, y_n) → (x_n, y_{n+1}) → (x_{n+1}, y_{n+1})`
//! on a biquadratic curve, generated by taking the second root alternately in
//! `y` and in `x`.

use std::collections::VecDeque;

use crate::curve::BiquadraticCurve;
use crate::error::{Error, Result};
use crate::Scalar;

/// Successive steps smaller than this (relative) count towards stagnation.
pub const STAGNATION_RTOL: f64 = 1e-13;
/// Number of consecutive tiny steps that make a lattice stagnant.
pub const STAGNATION_STEPS: usize = 3;
/// Seeds must satisfy `|F| ≤ SEED_RTOL · scale`.
pub const SEED_RTOL: f64 = 1e-10;

/// How to pick `y_0` among the two roots of `F(x_0, ·)` when it is not given.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RootSelector {
    /// The root nearest to the hint.
    ByHint(Scalar),
    /// `0` for `(−X_1 − √P)/(2X_2)`, `1` for the other root (principal `√P`).
    ByIndex(usize),
}

impl RootSelector {
    pub fn pick(&self, curve: &BiquadraticCurve, x: Scalar) -> Result<Scalar> {
        match *self {
            RootSelector::ByHint(h) => Ok(curve.y_roots(x, Some(h))?.first),
            RootSelector::ByIndex(0) => Ok(curve.y_roots(x, None)?.first),
            RootSelector::ByIndex(1) => Ok(curve.y_roots(x, None)?.second),
            RootSelector::ByIndex(k) => Err(Error::InvalidRange(format!(
                "root index must be 0 or 1, got {k}"
            ))),
        }
    }
}

/// Seed of a lattice: the point `(x_0, y_0)` placed at index `origin`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec {
    pub curve: BiquadraticCurve,
    pub x0: Scalar,
    pub y0: Scalar,
    pub origin: i64,
}

impl LatticeSpec {
    pub fn new(curve: BiquadraticCurve, x0: Scalar, y0: Scalar) -> Result<Self> {
        let residual = curve.relative_residual(x0, y0);
        if residual > SEED_RTOL {
            return Err(Error::OffCurve {
                x: x0,
                y: y0,
                residual,
            });
        }
        Ok(LatticeSpec {
            curve,
            x0,
            y0,
            origin: 0,
        })
    }

    /// Seed at `x0` with `y0` chosen among the two roots.
    pub fn select(curve: BiquadraticCurve, x0: Scalar, selector: RootSelector) -> Result<Self> {
        let y0 = selector.pick(&curve, x0)?;
        Self::new(curve, x0, y0)
    }

    /// Place the seed at index `origin` instead of 0.
    pub fn at_index(mut self, origin: i64) -> Self {
        self.origin = origin;
        self
    }
}

/// A lattice materialised on a contiguous index range `lo..=hi`.
#[derive(Clone, Debug)]
pub struct LatticePair {
    spec: LatticeSpec,
    lo: i64,
    pts: VecDeque<(Scalar, Scalar)>,
    tiny_fwd: usize,
    tiny_bwd: usize,
}

fn tiny(a: Scalar, b: Scalar) -> bool {
    (a - b).norm() < STAGNATION_RTOL * (1.0 + a.norm().max(b.norm()))
}

impl LatticePair {
    pub fn new(spec: LatticeSpec) -> Self {
        let mut pts = VecDeque::new();
        pts.push_back((spec.x0, spec.y0));
        LatticePair {
            lo: spec.origin,
            spec,
            pts,
            tiny_fwd: 0,
            tiny_bwd: 0,
        }
    }

    /// Builds the lattice on `n_min..=n_max`, which must contain the seed index.
    pub fn generate(spec: LatticeSpec, n_min: i64, n_max: i64) -> Result<Self> {
        if n_min > spec.origin || n_max < spec.origin {
            return Err(Error::InvalidRange(format!(
                "range {n_min}..={n_max} does not contain the seed index {}",
                spec.origin
            )));
        }
        let mut lat = Self::new(spec);
        lat.extend_to(n_min, n_max)?;
        Ok(lat)
    }

    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn curve(&self) -> &BiquadraticCurve {
        &self.spec.curve
    }

    pub fn range(&self) -> (i64, i64) {
        (self.lo, self.lo + self.pts.len() as i64 - 1)
    }

    /// Grows the materialised range to cover `n_min..=n_max`.
    pub fn extend_to(&mut self, n_min: i64, n_max: i64) -> Result<()> {
        while self.range().1 < n_max {
            self.step_forward()?;
        }
        while self.range().0 > n_min {
            self.step_backward()?;
        }
        Ok(())
    }

    /// Appends `(x_{hi+1}, y_{hi+1})` and returns it.
    pub fn step_forward(&mut self) -> Result<(Scalar, Scalar)> {
        let (_, hi) = self.range();
        let (x, y) = *self.pts.back().expect("lattice is never empty");
        let c = &self.spec.curve;
        let sing = |_| Error::LatticeSingularity { index: hi + 1 };
        let y1 = c.y_complement(x, y).map_err(sing)?;
        let x1 = c.x_complement(y1, x).map_err(sing)?;
        self.tiny_fwd = if tiny(x, x1) && tiny(y, y1) {
            self.tiny_fwd + 1
        } else {
            0
        };
        if self.tiny_fwd >= STAGNATION_STEPS {
            return Err(Error::LatticeStagnation { index: hi + 1 });
        }
        self.pts.push_back((x1, y1));
        Ok((x1, y1))
    }

    /// Prepends `(x_{lo−1}, y_{lo−1})` and returns it.
    pub fn step_backward(&mut self) -> Result<(Scalar, Scalar)> {
        let (lo, _) = self.range();
        let (x, y) = *self.pts.front().expect("lattice is never empty");
        let c = &self.spec.curve;
        let sing = |_| Error::LatticeSingularity { index: lo - 1 };
        let xm = c.x_complement(y, x).map_err(sing)?;
        let ym = c.y_complement(xm, y).map_err(sing)?;
        self.tiny_bwd = if tiny(x, xm) && tiny(y, ym) {
            self.tiny_bwd + 1
        } else {
            0
        };
        if self.tiny_bwd >= STAGNATION_STEPS {
            return Err(Error::LatticeStagnation { index: lo - 1 });
        }
        self.pts.push_front((xm, ym));
        self.lo -= 1;
        Ok((xm, ym))
    }

    pub fn point(&self, n: i64) -> Result<(Scalar, Scalar)> {
        let (lo, hi) = self.range();
        if n < lo || n > hi {
            return Err(Error::NotMaterialized { index: n });
        }
        Ok(self.pts[(n - lo) as usize])
    }

    pub fn x(&self, n: i64) -> Result<Scalar> {
        self.point(n).map(|p| p.0)
    }

    pub fn y(&self, n: i64) -> Result<Scalar> {
        self.point(n).map(|p| p.1)
    }

    /// `(n, x_n, y_n)` over the materialised range.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Scalar, Scalar)> + '_ {
        self.pts
            .iter()
            .enumerate()
            .map(move |(k, &(x, y))| (self.lo + k as i64, x, y))
    }

    /// Largest relative residual of `F(x_n, y_n)` and `F(x_n, y_{n+1})` over the range.
    pub fn max_residual(&self) -> f64 {
        let c = &self.spec.curve;
        let mut worst = 0.0_f64;
        for (k, &(x, y)) in self.pts.iter().enumerate() {
            worst = worst.max(c.relative_residual(x, y));
            if let Some(&(_, y1)) = self.pts.get(k + 1) {
                worst = worst.max(c.relative_residual(x, y1));
            }
        }
        worst
    }
}

/// Closed-form lattices of the three classical degenerate cases, used as oracles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleLattice {
    /// `x_n = x0 + n h`, `y_n = y0 + n h`.
    Linear { x0: Scalar, y0: Scalar, h: Scalar },
    /// `x_n = y_n = a + b qⁿ`.
    Geometric { a: Scalar, b: Scalar, q: Scalar },
    /// `x_n = a + b qⁿ + c q⁻ⁿ`, `y_n = a + b q^{n−½} + c q^{½−n}`.
    AskeyWilson { a: Scalar, b: Scalar, c: Scalar, q: Scalar },
}

impl OracleLattice {
    pub fn point(&self, n: i64) -> (Scalar, Scalar) {
        match *self {
            OracleLattice::Linear { x0, y0, h } => (x0 + h * n as f64, y0 + h * n as f64),
            OracleLattice::Geometric { a, b, q } => {
                let v = a + b * q.powi(n as i32);
                (v, v)
            }
            OracleLattice::AskeyWilson { a, b, c, q } => {
                let qn = q.powi(n as i32);
                let s = q.sqrt();
                (a + b * qn + c / qn, a + b * qn / s + c * s / qn)
            }
        }
    }

    /// A curve carrying this lattice. The Askey–Wilson curve is fitted from
    /// lattice points.
    pub fn curve(&self) -> Result<BiquadraticCurve> {
        match *self {
            OracleLattice::Linear { x0, y0, h } => BiquadraticCurve::linear(h, y0 - x0),
            OracleLattice::Geometric { a, q, .. } => BiquadraticCurve::geometric(a, q),
            OracleLattice::AskeyWilson { .. } => {
                let mut pts = Vec::new();
                for n in -4..=4 {
                    let (x, y) = self.point(n);
                    pts.push((x, y));
                    pts.push((x, self.point(n + 1).1));
                }
                BiquadraticCurve::fit(&pts)
            }
        }
    }

    /// The lattice spec seeded at this oracle's `n = 0` point.
    pub fn spec(&self) -> Result<LatticeSpec> {
        let (x0, y0) = self.point(0);
        LatticeSpec::new(self.curve()?, x0, y0)
    }
}

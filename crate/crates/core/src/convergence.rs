//! Geometric convergence of the expansion terms `c_n 𝒴_n(z)`.
//!
//! The measured rate is the least-squares slope of `log|c_n 𝒴_n(z)|`. In the
//! logarithmic mode the predicted rate is `exp(−Im 2π(ξ_z − ξ_ζ)/ω)` where
//! `ξ` is the integral of `dv/√P` from a fixed base point and `ω` the same
//! integral around the node-lattice locus. Near-returns of the lattice
//! (`y_{n−1}` close to `y_{−1}`) produce isolated spikes in the terms; those
//! indices are flagged and left out of fits.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::Serialize;

use crate::curve::BiquadraticCurve;
use crate::diffops::BasisPair;
use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::solver::{ExpansionSolution, Mode};
use crate::Scalar;

/// Minimum number of usable terms for a rate fit.
pub const MIN_WINDOW: usize = 5;
/// Gauss–Legendre points per sub-segment.
const GL_POINTS: usize = 16;
/// Sub-segment length as a fraction of the distance to the nearest zero of `P`.
const STEP_FRACTION: f64 = 0.25;
const MAX_PIECES: usize = 4096;

/// Indices `n ≤ N` where `|y_{−1} − y_{n−1}|` falls below `threshold` times
/// the median of those distances, with the distance found.
pub fn detect_small_divisors(pair: &BasisPair, n: usize, threshold: f64) -> Result<Vec<(usize, f64)>> {
    if threshold <= 0.0 || n == 0 {
        return Ok(Vec::new());
    }
    let ym1 = pair.y(-1)?;
    let dist: Vec<f64> = (1..=n)
        .map(|k| pair.y(k as i64 - 1).map(|y| (ym1 - y).norm()))
        .collect::<Result<_>>()?;
    let mut sorted = dist.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    Ok(dist
        .iter()
        .enumerate()
        .filter(|(_, &d)| d < threshold * median)
        .map(|(i, &d)| (i + 1, d))
        .collect())
}

/// `exp` of the least-squares slope of `log|t_n|` against `n`, skipping
/// excluded indices and zero or non-finite terms.
pub fn fit_rate(terms: &[(usize, Scalar)], exclude: &[usize]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = terms
        .iter()
        .filter(|(n, t)| !exclude.contains(n) && t.is_finite() && t.norm() > 0.0)
        .map(|&(n, t)| (n as f64, t.norm().ln()))
        .collect();
    if pts.len() < MIN_WINDOW {
        return Err(Error::WindowTooSmall { usable: pts.len() });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok((sxy / sxx).exp())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub z: Scalar,
    pub empirical_rate: f64,
    pub predicted_rate: Option<f64>,
    pub window: (usize, usize),
    pub smalldiv_flags: Vec<usize>,
    /// `empirical_rate ≥ 1`.
    pub not_converging: bool,
}

/// Measured rate of `c_n 𝒴_n(z)` over `n_min..=n_max`.
pub fn empirical_rate(sol: &ExpansionSolution, z: Scalar, n_min: usize, n_max: usize) -> Result<RateReport> {
    if n_max < n_min + MIN_WINDOW {
        return Err(Error::WindowTooSmall {
            usable: n_max.saturating_sub(n_min),
        });
    }
    let terms = sol.terms(n_max, z)?;
    let window: Vec<(usize, Scalar)> = (n_min..=n_max).map(|k| (k, terms[k])).collect();
    let flags: Vec<usize> = sol.diagnostics.smalldiv_flags.iter().map(|f| f.0).collect();
    let rate = fit_rate(&window, &flags)?;
    Ok(RateReport {
        z,
        empirical_rate: rate,
        predicted_rate: None,
        window: (n_min, n_max),
        smalldiv_flags: flags.into_iter().filter(|n| (n_min..=n_max).contains(n)).collect(),
        not_converging: rate >= 1.0,
    })
}

/// Integrates `dv/√P(v)` along polygonal paths, continuing `√P` from one
/// node to the next.
#[derive(Clone, Debug)]
pub struct PathIntegrator {
    p: Polynomial,
    zeros: Vec<Scalar>,
    nodes: Vec<(f64, f64)>,
}

impl PathIntegrator {
    pub fn new(curve: &BiquadraticCurve) -> Result<Self> {
        let p = curve.discriminant_p().clone();
        let zeros = if p.degree() == 0 { Vec::new() } else { p.roots()? };
        let rule = GaussLegendre::new(NonZeroUsize::new(GL_POINTS).expect("nonzero"));
        let mut nodes = rule.as_node_weight_pairs().to_vec();
        nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(PathIntegrator { p, zeros, nodes })
    }

    /// Next `√P(v)` on the branch continuing `prev`.
    fn continue_root(&self, v: Scalar, prev: Scalar) -> Result<Scalar> {
        let s = self.p.eval(v).sqrt();
        let (d_plus, d_minus) = ((s - prev).norm(), (s + prev).norm());
        if (d_plus - d_minus).abs() < 0.1 * (d_plus + d_minus) {
            return Err(Error::RefinePath(v));
        }
        Ok(if d_plus <= d_minus { s } else { -s })
    }

    fn distance_to_zeros(&self, a: Scalar, b: Scalar) -> (f64, Scalar) {
        let mut best = (f64::INFINITY, a);
        for &r in &self.zeros {
            let ab = b - a;
            let t = if ab.norm_sqr() == 0.0 {
                0.0
            } else {
                ((r - a) * ab.conj()).re / ab.norm_sqr()
            };
            let closest = a + ab * t.clamp(0.0, 1.0);
            let d = (r - closest).norm();
            if d < best.0 {
                best = (d, r);
            }
        }
        best
    }

    /// `∫_a^b dv/√P` on the straight segment; `branch` holds `√P` at `a` on
    /// entry and at `b` on exit.
    pub fn segment(&self, a: Scalar, b: Scalar, branch: &mut Scalar) -> Result<Scalar> {
        let len = (b - a).norm();
        if len == 0.0 {
            return Ok(Scalar::new(0.0, 0.0));
        }
        let (dist, near) = self.distance_to_zeros(a, b);
        if dist <= 1e-8 * (1.0 + a.norm() + b.norm()) {
            return Err(Error::PathThroughBranchPoint(near));
        }
        let pieces = ((len / (STEP_FRACTION * dist)).ceil() as usize).clamp(1, MAX_PIECES);
        let mut total = Scalar::new(0.0, 0.0);
        let h = (b - a) / pieces as f64;
        for k in 0..pieces {
            let lo = a + h * k as f64;
            for &(t, w) in &self.nodes {
                let v = lo + h * (0.5 * (t + 1.0));
                *branch = self.continue_root(v, *branch)?;
                total += h * 0.5 * w / *branch;
            }
        }
        *branch = self.continue_root(b, *branch)?;
        Ok(total)
    }

    /// Sum of segment integrals along `path`, starting on the principal
    /// branch at `path[0]` unless `branch` is given.
    pub fn polyline(&self, path: &[Scalar], branch: Option<Scalar>) -> Result<(Scalar, Scalar)> {
        let mut br = branch.unwrap_or_else(|| self.p.eval(path[0]).sqrt());
        let mut total = Scalar::new(0.0, 0.0);
        for w in path.windows(2) {
            total += self.segment(w[0], w[1], &mut br)?;
        }
        Ok((total, br))
    }

    /// `∫ dv/√P` from `base` to `z`, detouring around zeros of `P` when the
    /// straight segment runs into one.
    pub fn from_base(&self, base: Scalar, z: Scalar) -> Result<Scalar> {
        match self.polyline(&[base, z], None) {
            Err(Error::PathThroughBranchPoint(r)) => {
                let mid = (base + z) * 0.5;
                let off = (z - base) * Scalar::new(0.0, 0.5);
                self.polyline(&[base, mid + off, z], None)
                    .or_else(|_| self.polyline(&[base, mid - off, z], None))
                    .map(|v| v.0)
                    .map_err(|_| Error::PathThroughBranchPoint(r))
            }
            other => other.map(|v| v.0),
        }
    }
}

/// `∮ dv/√P` around the closed polygon through `locus` (in order).
pub fn period_quadrature(curve: &BiquadraticCurve, locus: &[Scalar]) -> Result<Scalar> {
    if locus.len() < 3 {
        return Err(Error::InvalidRange("a closed locus needs at least 3 points".into()));
    }
    let integ = PathIntegrator::new(curve)?;
    let mut path = locus.to_vec();
    path.push(locus[0]);
    Ok(integ.polyline(&path, None)?.0)
}

/// Orders points by angle about their centroid, starting from `start`'s position.
pub fn order_by_angle(points: &[Scalar], start: usize) -> Vec<Scalar> {
    let m = points.len() as f64;
    let centre: Scalar = points.iter().sum::<Scalar>() / m;
    let a0 = (points[start] - centre).arg();
    let mut v: Vec<(f64, Scalar)> = points
        .iter()
        .map(|&p| ((p - centre).arg() - a0).rem_euclid(std::f64::consts::TAU))
        .zip(points.iter().copied())
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v.into_iter().map(|(_, p)| p).collect()
}

/// Predicted rates for a logarithmic-mode solution.
#[derive(Clone, Debug)]
pub struct RatePredictor {
    integ: PathIntegrator,
    base: Scalar,
    omega: Scalar,
    xi_ref: Scalar,
}

impl RatePredictor {
    /// `ω` comes from the node-lattice locus `x_{−1}..=x_N`; its orientation
    /// is chosen so that `Im 2π(ξ_{x'_0} − ξ_{x_{−1}})/ω < 0`, i.e. terms decay
    /// when moving from the node locus towards the pole locus.
    pub fn new(sol: &ExpansionSolution) -> Result<Self> {
        if sol.mode != Mode::Logarithmic {
            return Err(Error::WrongMode(
                "a predicted rate needs the logarithmic mode".into(),
            ));
        }
        let zeta = sol.zeta.ok_or_else(|| Error::WrongMode("no third root of a".into()))?;
        let base = sol.special.x_m1;
        let (_, hi) = sol.pair.unprimed.range();
        let xs: Vec<Scalar> = (-1..=hi).map(|n| sol.pair.x(n)).collect::<Result<_>>()?;
        let locus = order_by_angle(&xs, 0);
        let integ = PathIntegrator::new(&sol.eq.curve)?;
        let mut path = locus.clone();
        path.push(locus[0]);
        let (mut omega, _) = integ.polyline(&path, None)?;
        if omega.norm() == 0.0 {
            return Err(Error::RefinePath(base));
        }
        let tau = std::f64::consts::TAU;
        let xi_p0 = integ.from_base(base, sol.special.x_p0)?;
        if (tau * xi_p0 / omega).im > 0.0 {
            omega = -omega;
        }
        let xi_ref = integ.from_base(base, zeta)?;
        Ok(RatePredictor {
            integ,
            base,
            omega,
            xi_ref,
        })
    }

    pub fn omega(&self) -> Scalar {
        self.omega
    }

    /// `ξ_z − ξ_{x_{−1}}`.
    pub fn xi(&self, z: Scalar) -> Result<Scalar> {
        self.integ.from_base(self.base, z)
    }

    /// `Im 2π ξ_z/ω`.
    pub fn potential(&self, z: Scalar) -> Result<f64> {
        Ok((std::f64::consts::TAU * self.xi(z)? / self.omega).im)
    }

    /// `exp(−Im 2π(ξ_z − ξ_ζ)/ω)`.
    pub fn predict(&self, z: Scalar) -> Result<f64> {
        let arg = std::f64::consts::TAU * (self.xi(z)? - self.xi_ref) / self.omega;
        Ok((-arg.im).exp())
    }
}

/// One grid point of a rate map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateSample {
    pub z: Scalar,
    pub empirical_rate: Option<f64>,
    pub predicted_rate: Option<f64>,
    pub flags: Vec<String>,
}

/// Empirical and (when available) predicted rate at `z`; failures become flags.
pub fn rate_sample(sol: &ExpansionSolution, predictor: Option<&RatePredictor>, z: Scalar, window: (usize, usize)) -> RateSample {
    let mut flags = Vec::new();
    let empirical_rate = match empirical_rate(sol, z, window.0, window.1) {
        Ok(r) => {
            if r.not_converging {
                flags.push("NotConverging".to_string());
            }
            if !r.smalldiv_flags.is_empty() {
                flags.push("SmallDivisor".to_string());
            }
            Some(r.empirical_rate)
        }
        Err(e) => {
            flags.push(error_tag(&e));
            None
        }
    };
    let predicted_rate = predictor.and_then(|p| match p.predict(z) {
        Ok(v) => Some(v),
        Err(e) => {
            flags.push(error_tag(&e));
            None
        }
    });
    RateSample {
        z,
        empirical_rate,
        predicted_rate,
        flags,
    }
}

fn error_tag(e: &Error) -> String {
    let s = e.to_string();
    s.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}

/// `nx × ny` grid over `[re.0, re.1] × [im.0, im.1]`, row by row in `im`.
pub fn grid(re: (f64, f64), im: (f64, f64), nx: usize, ny: usize) -> Vec<Scalar> {
    let lin = |lo: f64, hi: f64, n: usize, k: usize| {
        if n <= 1 {
            lo
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    };
    (0..ny)
        .flat_map(|j| (0..nx).map(move |i| Scalar::new(lin(re.0, re.1, nx, i), lin(im.0, im.1, ny, j))))
        .collect()
}

//! Scenario config: one JSON document, complex numbers as `[re, im]`.

use std::path::PathBuf;

use elliptic_core::lattice::{LatticeSpec, RootSelector};
use elliptic_core::solver::{SolveOptions, SpecialOptions, SpecialSelect, SMALLDIV_THRESHOLD};
use elliptic_core::{BiquadraticCurve, DifferenceEquation, Polynomial, Scalar};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Run {
    Lattice,
    Solve,
    Verify,
    Ratemap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeSpec {
    General,
    Log,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationSpec {
    #[serde(default)]
    pub mode: Option<ModeSpec>,
    pub a: Vec<Scalar>,
    #[serde(default)]
    pub c: Option<Vec<Scalar>>,
    pub d: Vec<Scalar>,
    #[serde(default)]
    pub c0_free: Option<Scalar>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SelectorSpec {
    Hint(Scalar),
    Index(usize),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub x0: Scalar,
    #[serde(default)]
    pub y0: Option<Scalar>,
    #[serde(default)]
    pub selector: Option<SelectorSpec>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum SpecialSpec {
    Index(usize),
    Nearest(Scalar),
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecialConfig {
    #[serde(default)]
    pub m1: Option<SpecialSpec>,
    #[serde(default)]
    pub p0: Option<SpecialSpec>,
    #[serde(default)]
    pub y_m1_hint: Option<Scalar>,
    #[serde(default)]
    pub y_p0_hint: Option<Scalar>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { re: (-2.0, 2.0), im: (-2.0, 2.0), nx: 41, ny: 41 }
    }
}

fn default_factor() -> f64 {
    1.01
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Corrupt {
    pub index: usize,
    #[serde(default = "default_factor")]
    pub factor: f64,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_min: Option<i64>,
    #[serde(default)]
    pub n_max: Option<i64>,
    #[serde(default)]
    pub window: Option<(usize, usize)>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub smalldiv_threshold: Option<f64>,
    #[serde(default)]
    pub corrupt: Option<Corrupt>,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub curve: BiquadraticCurve,
    #[serde(default)]
    pub equation: Option<EquationSpec>,
    #[serde(default)]
    pub lattice_seed: Option<SeedSpec>,
    #[serde(default)]
    pub special: SpecialConfig,
    #[serde(default)]
    pub run: Option<Run>,
    #[serde(default)]
    pub params: Params,
}

pub const DEFAULT_N: usize = 10;
pub const DEFAULT_WINDOW: (usize, usize) = (20, 39);

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// Rejects a `run` field that names a different subcommand.
    pub fn check_run(&self, cmd: Run) -> Result<(), CliError> {
        match self.run {
            Some(r) if r != cmd => Err(CliError::Validation(format!(
                "config: run is {r:?} but the {cmd:?} subcommand was given"
            ))),
            _ => Ok(()),
        }
    }

    pub fn n(&self, flag: Option<usize>) -> usize {
        flag.or(self.params.n).unwrap_or(DEFAULT_N)
    }

    pub fn lattice_spec(&self) -> Result<LatticeSpec, CliError> {
        let seed = self
            .lattice_seed
            .as_ref()
            .ok_or_else(|| CliError::Validation("config: lattice_seed is required".into()))?;
        let spec = match (seed.y0, seed.selector) {
            (Some(y0), _) => LatticeSpec::new(self.curve.clone(), seed.x0, y0),
            (None, sel) => {
                let sel = match sel {
                    Some(SelectorSpec::Hint(h)) => RootSelector::ByHint(h),
                    Some(SelectorSpec::Index(k)) if k <= 1 => RootSelector::ByIndex(k),
                    Some(SelectorSpec::Index(k)) => {
                        return Err(CliError::Validation(format!("lattice_seed.selector: index {k} is not 0 or 1")))
                    }
                    None => RootSelector::ByIndex(0),
                };
                LatticeSpec::select(self.curve.clone(), seed.x0, sel)
            }
        };
        spec.map_err(|e| CliError::Validation(format!("lattice_seed: {e}")))
    }

    pub fn lattice_range(&self, flag: Option<usize>) -> Result<(i64, i64), CliError> {
        let n = self.n(flag) as i64;
        let (lo, hi) = (self.params.n_min.unwrap_or(-n), self.params.n_max.unwrap_or(n));
        if lo > 0 || hi < 0 {
            return Err(CliError::Validation(format!(
                "params: range [{lo}, {hi}] must contain the seed index 0"
            )));
        }
        Ok((lo, hi))
    }

    pub fn equation(&self) -> Result<DifferenceEquation, CliError> {
        let spec = self
            .equation
            .as_ref()
            .ok_or_else(|| CliError::Validation("config: equation is required".into()))?;
        let a = Polynomial::new(spec.a.clone());
        let d = Polynomial::new(spec.d.clone());
        let c = spec.c.clone().map(Polynomial::new).unwrap_or_else(Polynomial::zero);
        match spec.mode {
            Some(ModeSpec::Log) if !c.is_zero() => {
                return Err(CliError::Validation("equation: log mode requires c to be absent or zero".into()))
            }
            Some(ModeSpec::General) if c.is_zero() => {
                return Err(CliError::Validation("equation: general mode requires a nonzero c".into()))
            }
            _ => {}
        }
        DifferenceEquation::from_polynomials(self.curve.clone(), a, c, d)
            .map_err(|e| CliError::Validation(format!("equation: {e}")))
    }

    pub fn solve_options(&self, n: usize) -> Result<SolveOptions, CliError> {
        let pick = |s: Option<SpecialSpec>, default: SpecialSelect| match s {
            Some(SpecialSpec::Index(k)) => SpecialSelect::Index(k),
            Some(SpecialSpec::Nearest(z)) => SpecialSelect::Nearest(z),
            None => default,
        };
        let defaults = SpecialOptions::default();
        let threshold = self.params.smalldiv_threshold.unwrap_or(SMALLDIV_THRESHOLD);
        if !(threshold.is_finite() && threshold >= 0.0) {
            return Err(CliError::Validation(format!("params.smalldiv_threshold: {threshold} is not a finite non-negative number")));
        }
        Ok(SolveOptions {
            special: SpecialOptions {
                m1: pick(self.special.m1, defaults.m1),
                p0: pick(self.special.p0, defaults.p0),
                y_m1_hint: self.special.y_m1_hint,
                y_p0_hint: self.special.y_p0_hint,
            },
            n,
            c0_free: self.equation.as_ref().and_then(|e| e.c0_free),
            smalldiv_threshold: threshold,
        })
    }

    pub fn window(&self) -> Result<(usize, usize), CliError> {
        let w = self.params.window.unwrap_or(DEFAULT_WINDOW);
        if w.1 < w.0 + 5 {
            return Err(CliError::Validation(format!(
                "params.window: [{}, {}] needs at least 5 terms",
                w.0, w.1
            )));
        }
        Ok(w)
    }

    pub fn grid(&self) -> Result<GridSpec, CliError> {
        let g = self.params.grid.unwrap_or_default();
        if g.nx == 0 || g.ny == 0 {
            return Err(CliError::Validation("params.grid: nx and ny must be positive".into()));
        }
        Ok(g)
    }
}

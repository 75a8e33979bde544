//! CSV and JSON dumps. Complex numbers are written as twin `re`/`im` columns
//! in CSV and as `[re, im]` arrays in JSON, using the shortest round-trip
//! decimal form so reading back is exact.

use std::io::{Read, Write};

use serde::Serialize;

use crate::convergence::RateSample;
use crate::curve::BiquadraticCurve;
use crate::error::{Error, Result};
use crate::lattice::LatticePair;
use crate::solver::{Diagnostics, ExpansionSolution, InterpolationReport, Mode, SpecialPoints};
use crate::Scalar;

pub const LATTICE_HEADER: [&str; 5] = ["n", "re(x_n)", "im(x_n)", "re(y_n)", "im(y_n)"];
pub const RATEMAP_HEADER: [&str; 5] = ["re(z)", "im(z)", "empirical_rate", "predicted_rate", "flags"];

pub fn write_lattice_csv<W: Write>(lattice: &LatticePair, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(LATTICE_HEADER)?;
    for (n, x, y) in lattice.iter() {
        w.write_record([n.to_string(), x.re.to_string(), x.im.to_string(), y.re.to_string(), y.im.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back `(n, x_n, y_n)` rows written by [`write_lattice_csv`].
pub fn read_lattice_csv<R: Read>(input: R) -> Result<Vec<(i64, Scalar, Scalar)>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(LATTICE_HEADER) {
        return Err(Error::Io(format!("unexpected lattice header {header:?}")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Io(format!("{s}: {e}")));
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let n = rec[0].parse::<i64>().map_err(|e| Error::Io(e.to_string()))?;
        rows.push((n, Scalar::new(num(&rec[1])?, num(&rec[2])?), Scalar::new(num(&rec[3])?, num(&rec[4])?)));
    }
    Ok(rows)
}

pub fn write_ratemap_csv<W: Write>(samples: &[RateSample], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(RATEMAP_HEADER)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for s in samples {
        w.write_record([
            s.z.re.to_string(),
            s.z.im.to_string(),
            opt(s.empirical_rate),
            opt(s.predicted_rate),
            s.flags.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct LatticeRanges {
    pub unprimed: (i64, i64),
    pub primed: (i64, i64),
}

/// Everything a solve produces, in a fixed field order.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionDump<'a> {
    pub curve: &'a BiquadraticCurve,
    pub mode: Mode,
    pub special: &'a SpecialPoints,
    pub lattice_ranges: LatticeRanges,
    pub coefficients: &'a [Scalar],
    pub c_n: &'a [Scalar],
    pub c0_free: Option<Scalar>,
    pub zeta: Option<Scalar>,
    pub interpolation: Option<&'a InterpolationReport>,
    pub diagnostics: &'a Diagnostics,
}

impl<'a> SolutionDump<'a> {
    pub fn new(sol: &'a ExpansionSolution, interpolation: Option<&'a InterpolationReport>) -> Self {
        SolutionDump {
            curve: &sol.eq.curve,
            mode: sol.mode,
            special: &sol.special,
            lattice_ranges: LatticeRanges {
                unprimed: sol.pair.unprimed.range(),
                primed: sol.pair.primed.range(),
            },
            coefficients: &sol.coeffs,
            c_n: &sol.cn,
            c0_free: sol.c0_free,
            zeta: sol.zeta,
            interpolation,
            diagnostics: &sol.diagnostics,
        }
    }
}

pub fn write_solution_json<W: Write>(dump: &SolutionDump<'_>, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, dump)?;
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeSpec;
    use crate::re;

    #[test]
    fn lattice_csv_round_trip() {
        let c = BiquadraticCurve::geometric(re(0.1), Scalar::from_polar(0.9, 0.4)).unwrap();
        let x0 = Scalar::new(0.3, -0.7);
        let lat = LatticePair::generate(LatticeSpec::new(c, x0, x0).unwrap(), -3, 3).unwrap();
        let mut buf = Vec::new();
        write_lattice_csv(&lat, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("n,re(x_n),im(x_n),re(y_n),im(y_n)\n-3,"));
        assert_eq!(text.lines().count(), 8);
        let rows = read_lattice_csv(buf.as_slice()).unwrap();
        for ((n, x, y), (m, u, v)) in rows.iter().zip(lat.iter()) {
            assert_eq!((*n, *x, *y), (m, u, v));
        }
    }

    #[test]
    fn ratemap_csv_blank_prediction() {
        let s = RateSample {
            z: Scalar::new(0.5, -0.25),
            empirical_rate: Some(0.75),
            predicted_rate: None,
            flags: vec!["SmallDivisor".into()],
        };
        let mut buf = Vec::new();
        write_ratemap_csv(&[s], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "re(z),im(z),empirical_rate,predicted_rate,flags\n0.5,-0.25,0.75,,SmallDivisor\n"
        );
    }
}

//! Catalog of target functions used by the experiment drivers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indexsets::MultiIndex;
use crate::polybasis::BasisKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum TargetFunction {
    /// `log(8 (y1^2 + y2^2)) - 2 (y1^2 + y2^2)`
    LogDisc,
    /// `cos(2 y1) sin(y2)`
    CosSin,
    /// `1 / sum_i sqrt(|y_i|)`
    InvSqrt,
    /// `exp(-sum_i y_i / d)`
    ExpMean,
    /// `cos(sum_i y_i / d)`
    CosMean,
    /// A single tensor basis function, which lies in every space containing its index.
    Basis { index: MultiIndex, basis: BasisKind },
}

impl TargetFunction {
    pub fn eval(&self, y: &[f64]) -> f64 {
        match self {
            TargetFunction::LogDisc => {
                let s = y[0] * y[0] + y[1] * y[1];
                (8.0 * s).ln() - 2.0 * s
            }
            TargetFunction::CosSin => (2.0 * y[0]).cos() * y[1].sin(),
            TargetFunction::InvSqrt => 1.0 / y.iter().map(|v| v.abs().sqrt()).sum::<f64>(),
            TargetFunction::ExpMean => (-y.iter().sum::<f64>() / y.len() as f64).exp(),
            TargetFunction::CosMean => (y.iter().sum::<f64>() / y.len() as f64).cos(),
            TargetFunction::Basis { index, basis } => index
                .entries()
                .iter()
                .zip(y)
                .map(|(&k, &v)| basis.eval_1d(k, v))
                .product(),
        }
    }

    /// Rebinds a basis-function target to the basis of an experiment.
    pub fn with_basis(self, kind: BasisKind) -> Self {
        match self {
            TargetFunction::Basis { index, .. } => TargetFunction::Basis { index, basis: kind },
            other => other,
        }
    }

    pub fn check_dimension(&self, d: usize) -> Result<()> {
        let ok = match self {
            TargetFunction::LogDisc | TargetFunction::CosSin => d == 2,
            TargetFunction::Basis { index, .. } => index.dim() == d,
            _ => d >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("target `{self}` is not defined in dimension {d}")))
        }
    }

    /// A bound `L >= sup |f|` over `[-1, 1]^d`, where one is known in closed form.
    pub fn sup_bound(&self, d: usize) -> Option<f64> {
        match self {
            TargetFunction::CosSin | TargetFunction::CosMean => Some(1.0),
            TargetFunction::ExpMean => Some(std::f64::consts::E),
            TargetFunction::Basis { index, basis } => {
                let _ = d;
                Some(
                    index
                        .entries()
                        .iter()
                        .map(|&k| match basis {
                            BasisKind::Legendre => ((2 * k + 1) as f64).sqrt(),
                            _ if k == 0 => 1.0,
                            _ => std::f64::consts::SQRT_2,
                        })
                        .product(),
                )
            }
            TargetFunction::LogDisc | TargetFunction::InvSqrt => None,
        }
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetFunction::LogDisc => f.write_str("logdisc"),
            TargetFunction::CosSin => f.write_str("cossin"),
            TargetFunction::InvSqrt => f.write_str("invsqrt"),
            TargetFunction::ExpMean => f.write_str("expmean"),
            TargetFunction::CosMean => f.write_str("cosmean"),
            TargetFunction::Basis { index, .. } => write!(f, "psi{index}"),
        }
    }
}

impl FromStr for TargetFunction {
    type Err = Error;

    /// Catalog ids, or `psi(k1,...,kd)` for a basis function (bound to
    /// Legendre until [`TargetFunction::with_basis`] is applied).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "logdisc" => Ok(TargetFunction::LogDisc),
            "cossin" => Ok(TargetFunction::CosSin),
            "invsqrt" => Ok(TargetFunction::InvSqrt),
            "expmean" => Ok(TargetFunction::ExpMean),
            "cosmean" => Ok(TargetFunction::CosMean),
            _ => {
                let inner = s
                    .strip_prefix("psi(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| Error::Parse(format!("unknown target function `{s}`")))?;
                let entries = inner
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::Parse(format!("bad degree `{t}` in `{s}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(TargetFunction::Basis {
                    index: MultiIndex::new(entries)?,
                    basis: BasisKind::Legendre,
                })
            }
        }
    }
}

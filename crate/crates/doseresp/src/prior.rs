//! Prior families for regression coefficients and hyperparameters, with the
//! `family(p1,p2)` text syntax used in configuration files and sweep lists.

use crate::math::{inverse_logit, log1p_exp};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PriorError {
    #[error("invalid prior parameters: {0}")]
    InvalidParams(String),
    #[error("cannot parse prior `{0}`: expected family(p1,p2) such as normal(0,20)")]
    Parse(String),
    #[error("prior family `{0}` is only available for conjugate closed-form analysis, not for sampling")]
    UnsupportedFamily(String),
}

/// A prior family with its parameters. `uniform(-inf,inf)` parses to
/// `Flat`, the improper uniform over the whole real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriorSpec {
    Normal { loc: f64, scale: f64 },
    Logistic { loc: f64, scale: f64 },
    Uniform { lower: f64, upper: f64 },
    Flat,
    /// Normal(0, scale) restricted to positive values; used for scale
    /// hyperparameters.
    HalfNormal { scale: f64 },
}

impl PriorSpec {
    pub fn normal(loc: f64, scale: f64) -> Result<Self, PriorError> {
        if !(scale > 0.0) || !scale.is_finite() || !loc.is_finite() {
            return Err(PriorError::InvalidParams(format!("normal({loc},{scale})")));
        }
        Ok(PriorSpec::Normal { loc, scale })
    }

    pub fn logistic(loc: f64, scale: f64) -> Result<Self, PriorError> {
        if !(scale > 0.0) || !scale.is_finite() || !loc.is_finite() {
            return Err(PriorError::InvalidParams(format!("logistic({loc},{scale})")));
        }
        Ok(PriorSpec::Logistic { loc, scale })
    }

    pub fn uniform(lower: f64, upper: f64) -> Result<Self, PriorError> {
        if lower.is_infinite() && upper.is_infinite() && lower < upper {
            return Ok(PriorSpec::Flat);
        }
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(PriorError::InvalidParams(format!("uniform({lower},{upper})")));
        }
        Ok(PriorSpec::Uniform { lower, upper })
    }

    pub fn half_normal(scale: f64) -> Result<Self, PriorError> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(PriorError::InvalidParams(format!("half_normal({scale})")));
        }
        Ok(PriorSpec::HalfNormal { scale })
    }

    /// Log-density and its derivative with respect to the value, both on
    /// the constrained scale. `Flat` contributes `(0, 0)`; `Uniform`
    /// contributes its constant inside the support (the bounded-interval
    /// transform keeps evaluation inside the support, so no bounds check
    /// happens here).
    pub fn log_pdf_and_deriv(&self, value: f64) -> (f64, f64) {
        match *self {
            PriorSpec::Normal { loc, scale } => {
                let z = (value - loc) / scale;
                (-0.5 * (2.0 * PI).ln() - scale.ln() - 0.5 * z * z, -z / scale)
            }
            PriorSpec::Logistic { loc, scale } => {
                let t = (value - loc) / scale;
                let lp = -t - scale.ln() - 2.0 * log1p_exp(-t);
                let grad = (1.0 - 2.0 * inverse_logit(t)) / scale;
                (lp, grad)
            }
            PriorSpec::Uniform { lower, upper } => (-(upper - lower).ln(), 0.0),
            PriorSpec::Flat => (0.0, 0.0),
            PriorSpec::HalfNormal { scale } => {
                let z = value / scale;
                (
                    2f64.ln() - 0.5 * (2.0 * PI).ln() - scale.ln() - 0.5 * z * z,
                    -z / scale,
                )
            }
        }
    }

    /// Interval support for bounded families, `None` for unbounded ones.
    pub fn interval(&self) -> Option<(f64, f64)> {
        match *self {
            PriorSpec::Uniform { lower, upper } => Some((lower, upper)),
            _ => None,
        }
    }
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PriorSpec::Normal { loc, scale } => write!(f, "normal({loc},{scale})"),
            PriorSpec::Logistic { loc, scale } => write!(f, "logistic({loc},{scale})"),
            PriorSpec::Uniform { lower, upper } => write!(f, "uniform({lower},{upper})"),
            PriorSpec::Flat => write!(f, "flat"),
            PriorSpec::HalfNormal { scale } => write!(f, "half_normal(0,{scale})"),
        }
    }
}

fn parse_bound(s: &str) -> Result<f64, ()> {
    match s {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other.parse().map_err(|_| ()),
    }
}

impl FromStr for PriorSpec {
    type Err = PriorError;

    /// Accepts `flat`, `normal(0,20)`, `logistic(0,10)`, `uniform(-100,100)`,
    /// `uniform(-inf,inf)` (= flat), `half_normal(2)` and `half_normal(0,2)`.
    /// Case-insensitive; spaces are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned: String =
            s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
        if cleaned == "flat" {
            return Ok(PriorSpec::Flat);
        }
        let (family, rest) = cleaned
            .split_once('(')
            .ok_or_else(|| PriorError::Parse(s.to_string()))?;
        let args_str = rest.strip_suffix(')').ok_or_else(|| PriorError::Parse(s.to_string()))?;
        let args: Vec<f64> = args_str
            .split(',')
            .map(parse_bound)
            .collect::<Result<_, _>>()
            .map_err(|_| PriorError::Parse(s.to_string()))?;
        match (family, args.as_slice()) {
            ("normal", [loc, scale]) => PriorSpec::normal(*loc, *scale),
            ("logistic", [loc, scale]) => PriorSpec::logistic(*loc, *scale),
            ("uniform", [lower, upper]) => PriorSpec::uniform(*lower, *upper),
            ("half_normal" | "halfnormal", [scale]) => PriorSpec::half_normal(*scale),
            ("half_normal" | "halfnormal", [zero, scale]) if *zero == 0.0 => {
                PriorSpec::half_normal(*scale)
            }
            ("beta" | "weibull", _) => Err(PriorError::UnsupportedFamily(family.to_string())),
            _ => Err(PriorError::Parse(s.to_string())),
        }
    }
}

//! Decreasing-to-zero rate functions used by the construction: parsed from a
//! small textual grammar so runs are reproducible from the command line.
//!
//! Grammar: `1/log(t+S)`, `1/t`, `1/t^P`, `exp(-R*t)`, `A*exp(-R*t)`.

use std::fmt;

use thiserror::Error;

use crate::real::Real;

#[derive(Debug, Error)]
pub enum DecayParseError {
    #[error("cannot parse rate function: {0}")]
    Bad(String),
}

#[derive(Clone, Debug)]
pub enum DecayFn {
    /// 1 / log(t + shift)
    InvLog { shift: f64 },
    /// 1 / t^power
    InvPower { power: f64 },
    /// scale * exp(-rate * t)
    ExpNeg { rate: f64, scale: f64 },
    /// min(e^(-2t), inner(t)) — the normalization clamp for psi
    Clamped(Box<DecayFn>),
}

impl DecayFn {
    pub fn eval(&self, x: &Real, p: usize) -> Real {
        match self {
            DecayFn::InvLog { shift } => {
                let d = x.add(&Real::from_f64(*shift, p), p).ln(p);
                Real::one().div(&d, p)
            }
            DecayFn::InvPower { power } => {
                if (*power - 1.0).abs() < 1e-15 {
                    Real::one().div(x, p)
                } else {
                    Real::one().div(&x.pow(&Real::from_f64(*power, p), p), p)
                }
            }
            DecayFn::ExpNeg { rate, scale } => Real::from_f64(*scale, p)
                .mul(&Real::from_f64(*rate, p).neg().mul(x, p).exp(p), p),
            DecayFn::Clamped(inner) => {
                let cap = Real::from_i64(-2, p).mul(x, p).exp(p);
                inner.eval(x, p).min(&cap)
            }
        }
    }

    /// Wraps in the e^(-2t) clamp.
    pub fn clamped(self) -> DecayFn {
        DecayFn::Clamped(Box::new(self))
    }

    /// True when the clamp actually bites somewhere on [1, inf): checked at
    /// t = 1 where a decreasing function is largest.
    pub fn clamp_would_bite(&self, p: usize) -> bool {
        let one = Real::one();
        let cap = Real::from_i64(-2, p).exp(p);
        self.eval(&one, p).gt(&cap)
    }

    pub fn parse(s: &str) -> Result<DecayFn, DecayParseError> {
        let t = s.replace(' ', "");
        if let Some(rest) = t.strip_prefix("1/log(t+") {
            let shift = rest
                .strip_suffix(')')
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| DecayParseError::Bad(s.into()))?;
            return Ok(DecayFn::InvLog { shift });
        }
        if t == "1/t" {
            return Ok(DecayFn::InvPower { power: 1.0 });
        }
        if let Some(rest) = t.strip_prefix("1/t^") {
            let power = rest
                .parse::<f64>()
                .map_err(|_| DecayParseError::Bad(s.into()))?;
            return Ok(DecayFn::InvPower { power });
        }
        // [A*]exp(-R*t)
        let (scale, expr) = match t.split_once("*exp(") {
            Some((a, rest)) => (
                a.parse::<f64>().map_err(|_| DecayParseError::Bad(s.into()))?,
                format!("exp({rest}"),
            ),
            None => (1.0, t.clone()),
        };
        if let Some(rest) = expr.strip_prefix("exp(-") {
            let body = rest
                .strip_suffix(')')
                .ok_or_else(|| DecayParseError::Bad(s.into()))?;
            let rate = match body.strip_suffix("*t").or_else(|| body.strip_suffix("t")) {
                Some("") => 1.0,
                Some(r) => r.parse::<f64>().map_err(|_| DecayParseError::Bad(s.into()))?,
                None => return Err(DecayParseError::Bad(s.into())),
            };
            return Ok(DecayFn::ExpNeg { rate, scale });
        }
        Err(DecayParseError::Bad(s.into()))
    }
}

impl fmt::Display for DecayFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecayFn::InvLog { shift } => write!(f, "1/log(t+{shift})"),
            DecayFn::InvPower { power } => {
                if (*power - 1.0).abs() < 1e-15 {
                    write!(f, "1/t")
                } else {
                    write!(f, "1/t^{power}")
                }
            }
            DecayFn::ExpNeg { rate, scale } => {
                if (*scale - 1.0).abs() < 1e-15 {
                    write!(f, "exp(-{rate}*t)")
                } else {
                    write!(f, "{scale}*exp(-{rate}*t)")
                }
            }
            DecayFn::Clamped(inner) => write!(f, "min(exp(-2*t), {inner})"),
        }
    }
}

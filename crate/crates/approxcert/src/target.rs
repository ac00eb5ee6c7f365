//! Target functions for approximation and level-set measurement.
//!
//! A target carries a stated modulus of continuity so that pointwise
//! evaluations can be promoted to certified statements on whole cells.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cheb;
use crate::poly::Poly;
use crate::real::Real;

#[derive(Debug, Error)]
pub enum TargetError {
    #[error("invalid target specification: {0}")]
    BadSpec(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    /// |x|
    Abs,
    /// e^x
    Exp,
    /// 1 / (1 + 25 x^2)
    Runge,
    /// tanh(10 x), a smoothed sign function
    SignSmooth,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Abs => "abs",
            Builtin::Exp => "exp",
            Builtin::Runge => "runge",
            Builtin::SignSmooth => "sign_smooth",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "abs" => Some(Builtin::Abs),
            "exp" => Some(Builtin::Exp),
            "runge" => Some(Builtin::Runge),
            "sign_smooth" => Some(Builtin::SignSmooth),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModulusKind {
    Lipschitz,
    Holder,
}

/// Modulus of continuity `omega(h) = constant * h^exponent`
/// (exponent 1 for Lipschitz).
#[derive(Clone, Debug)]
pub struct Modulus {
    pub kind: ModulusKind,
    pub constant: Real,
    pub exponent: Real,
}

impl Modulus {
    pub fn lipschitz(constant: Real) -> Self {
        Modulus {
            kind: ModulusKind::Lipschitz,
            constant,
            exponent: Real::one(),
        }
    }

    /// omega(h), rounded up.
    pub fn eval_up(&self, h: &Real, p: usize) -> Real {
        match self.kind {
            ModulusKind::Lipschitz => self.constant.mul_up(h, p),
            ModulusKind::Holder => {
                if h.is_zero() || h.is_negative() {
                    return Real::zero();
                }
                let pow = h.pow(&self.exponent, p);
                // one extra ulp of slack for the transcendental route
                let slack = Real::one().add(&Real::pow2(-(p as i64) + 4, p), p);
                self.constant.mul_up(&pow.mul_up(&slack, p), p)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub enum TargetKind {
    ChebSeries(Vec<Real>),
    Builtin(Builtin),
    Polynomial(Poly),
}

/// A continuous function on [-1, 1] with a certified modulus of continuity.
#[derive(Clone, Debug)]
pub struct TargetFunction {
    pub kind: TargetKind,
    pub modulus: Modulus,
    pub prec: usize,
}

impl TargetFunction {
    pub fn from_series(coeffs: Vec<Real>, prec: usize) -> Self {
        let modulus = Modulus::lipschitz(series_lipschitz(&coeffs, prec));
        TargetFunction {
            kind: TargetKind::ChebSeries(coeffs),
            modulus,
            prec,
        }
    }

    pub fn from_builtin(b: Builtin, prec: usize) -> Self {
        let l = match b {
            Builtin::Abs => Real::one(),
            // upper bounds for max|f'| on [-1, 1]
            Builtin::Exp => Real::parse("2.7182818284590452354", prec).unwrap(),
            Builtin::Runge => Real::parse("3.2476", prec).unwrap(),
            Builtin::SignSmooth => Real::from_u64(10, prec),
        };
        TargetFunction {
            kind: TargetKind::Builtin(b),
            modulus: Modulus::lipschitz(l),
            prec,
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        let prec = p.precision_bits();
        let l = p.derivative().cheb_abs_sum();
        TargetFunction {
            kind: TargetKind::Polynomial(p),
            modulus: Modulus::lipschitz(l),
            prec,
        }
    }

    pub fn with_modulus(mut self, m: Modulus) -> Self {
        self.modulus = m;
        self
    }

    /// Raises the working precision for evaluations; coefficient values are
    /// kept exactly as given.
    pub fn with_precision(mut self, p: usize) -> Self {
        self.prec = p;
        if let TargetKind::Polynomial(q) = &self.kind {
            self.kind = TargetKind::Polynomial(q.with_precision(p));
        }
        self
    }

    pub fn eval(&self, x: &Real) -> Real {
        let p = self.prec;
        match &self.kind {
            TargetKind::ChebSeries(c) => cheb::clenshaw(c, x, p),
            TargetKind::Polynomial(q) => q.evaluate(x),
            TargetKind::Builtin(b) => match b {
                Builtin::Abs => x.abs(),
                Builtin::Exp => x.exp(p),
                Builtin::Runge => {
                    let d = Real::from_u64(25, p)
                        .mul(&x.mul(x, p), p)
                        .add(&Real::one(), p);
                    Real::one().div(&d, p)
                }
                Builtin::SignSmooth => Real::from_u64(10, p).mul(x, p).tanh(p),
            },
        }
    }

    /// Evaluation with a rigorous rounding-error majorant.
    pub fn eval_with_err(&self, x: &Real) -> (Real, Real) {
        let p = self.prec;
        match &self.kind {
            TargetKind::ChebSeries(c) => {
                let s = cheb::one_norm_up(c, p);
                cheb::clenshaw_with_err(c, x, p, &s)
            }
            TargetKind::Polynomial(q) => q.evaluate_with_err(x),
            TargetKind::Builtin(_) => {
                let v = self.eval(x);
                // library elementary functions are faithfully rounded;
                // allow a few ulps of slack
                let scale = v.abs().max(&Real::one());
                let err = scale.mul_up(&Real::pow2(-(p as i64) + 4, p), p);
                (v, err)
            }
        }
    }

    /// Highest Chebyshev index with a nonzero coefficient, when the target is
    /// itself a polynomial quantity.
    pub fn effective_degree(&self) -> Option<usize> {
        match &self.kind {
            TargetKind::ChebSeries(c) => {
                let mut d = 0;
                for (k, v) in c.iter().enumerate() {
                    if !v.is_zero() {
                        d = k;
                    }
                }
                Some(d)
            }
            TargetKind::Polynomial(q) => Some(q.degree()),
            TargetKind::Builtin(_) => None,
        }
    }

    /// Upper bound for sup |f| on [-1, 1] (cheap, certified).
    pub fn sup_upper_bound(&self) -> Real {
        let p = self.prec;
        match &self.kind {
            TargetKind::ChebSeries(c) => cheb::one_norm_up(c, p),
            TargetKind::Polynomial(q) => q.cheb_abs_sum(),
            TargetKind::Builtin(b) => match b {
                Builtin::Abs | Builtin::Runge | Builtin::SignSmooth => Real::one(),
                Builtin::Exp => Real::parse("2.7182818284590452354", p).unwrap(),
            },
        }
    }

    /// Sum of |a_k| for k > n: an upper bound for the degree-n best
    /// approximation error when the target is a Chebyshev series.
    pub fn tail_bound(&self, n: usize) -> Option<Real> {
        match &self.kind {
            TargetKind::ChebSeries(c) => {
                let p = self.prec;
                let mut s = Real::zero();
                for v in c.iter().skip(n + 1) {
                    s = s.add_up(&v.abs(), p);
                }
                Some(s)
            }
            _ => None,
        }
    }

    /// The series as a polynomial (series and polynomial targets only).
    pub fn as_poly(&self) -> Option<Poly> {
        match &self.kind {
            TargetKind::ChebSeries(c) => Some(Poly::from_cheb(c.clone(), self.prec)),
            TargetKind::Polynomial(q) => Some(q.clone()),
            TargetKind::Builtin(_) => None,
        }
    }
}

fn series_lipschitz(coeffs: &[Real], p: usize) -> Real {
    // ||f'|| <= sum |a_k| k^2
    let mut s = Real::zero();
    for (k, v) in coeffs.iter().enumerate() {
        let k2 = Real::from_u64((k * k) as u64, p);
        s = s.add_up(&v.abs().mul_up(&k2, p), p);
    }
    s
}

/// JSON schema for target functions.
#[derive(Serialize, Deserialize)]
pub struct TargetJson {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<ModulusJson>,
}

#[derive(Serialize, Deserialize)]
pub struct ModulusJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub constant: String,
    pub exponent: String,
}

impl TargetFunction {
    pub fn from_json(j: &TargetJson, prec: usize) -> Result<Self, TargetError> {
        let mut t = match j.kind.as_str() {
            "builtin" => {
                let name = j
                    .name
                    .as_deref()
                    .ok_or_else(|| TargetError::BadSpec("builtin requires a name".into()))?;
                let b = Builtin::from_name(name)
                    .ok_or_else(|| TargetError::BadSpec(format!("unknown builtin {name}")))?;
                TargetFunction::from_builtin(b, prec)
            }
            "chebyshev_series" => {
                let coeffs = j
                    .coefficients
                    .as_ref()
                    .ok_or_else(|| TargetError::BadSpec("series requires coefficients".into()))?;
                let mut c = Vec::with_capacity(coeffs.len());
                for s in coeffs {
                    c.push(Real::parse(s, prec).ok_or_else(|| {
                        TargetError::BadSpec(format!("bad coefficient {s}"))
                    })?);
                }
                TargetFunction::from_series(c, prec)
            }
            "polynomial" => {
                let coeffs = j.coefficients.as_ref().ok_or_else(|| {
                    TargetError::BadSpec("polynomial requires coefficients".into())
                })?;
                let mut c = Vec::with_capacity(coeffs.len());
                for s in coeffs {
                    c.push(Real::parse(s, prec).ok_or_else(|| {
                        TargetError::BadSpec(format!("bad coefficient {s}"))
                    })?);
                }
                TargetFunction::from_poly(Poly::from_cheb(c, prec))
            }
            other => return Err(TargetError::BadSpec(format!("unknown kind {other}"))),
        };
        if let Some(m) = &j.modulus {
            let kind = match m.kind.as_str() {
                "lipschitz" => ModulusKind::Lipschitz,
                "holder" => ModulusKind::Holder,
                other => return Err(TargetError::BadSpec(format!("unknown modulus {other}"))),
            };
            let constant = Real::parse(&m.constant, prec)
                .ok_or_else(|| TargetError::BadSpec("bad modulus constant".into()))?;
            let exponent = Real::parse(&m.exponent, prec)
                .ok_or_else(|| TargetError::BadSpec("bad modulus exponent".into()))?;
            t = t.with_modulus(Modulus {
                kind,
                constant,
                exponent,
            });
        }
        Ok(t)
    }

    pub fn to_json(&self) -> TargetJson {
        let (kind, name, coefficients) = match &self.kind {
            TargetKind::Builtin(b) => ("builtin".to_string(), Some(b.name().to_string()), None),
            TargetKind::ChebSeries(c) => (
                "chebyshev_series".to_string(),
                None,
                Some(c.iter().map(|v| v.to_decimal()).collect()),
            ),
            TargetKind::Polynomial(q) => (
                "polynomial".to_string(),
                None,
                Some(q.cheb_coeffs().iter().map(|v| v.to_decimal()).collect()),
            ),
        };
        TargetJson {
            kind,
            name,
            coefficients,
            modulus: Some(ModulusJson {
                kind: match self.modulus.kind {
                    ModulusKind::Lipschitz => "lipschitz".into(),
                    ModulusKind::Holder => "holder".into(),
                },
                constant: self.modulus.constant.to_decimal(),
                exponent: self.modulus.exponent.to_decimal(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 192;

    #[test]
    fn builtin_values() {
        let abs = TargetFunction::from_builtin(Builtin::Abs, P);
        assert!(abs
            .eval(&Real::from_f64(-0.3, P))
            .sub(&Real::from_f64(0.3, P), P)
            .is_zero());
        let runge = TargetFunction::from_builtin(Builtin::Runge, P);
        let v = runge.eval(&Real::zero());
        assert!(v.sub(&Real::one(), P).abs().lt(&Real::pow2(-150, P)));
    }

    #[test]
    fn series_tail_bound() {
        let f = TargetFunction::from_series(
            vec![Real::zero(), Real::one(), Real::from_f64(0.25, P)],
            P,
        );
        let t1 = f.tail_bound(1).unwrap();
        assert!(t1.sub(&Real::from_f64(0.25, P), P).abs().lt(&Real::pow2(-100, P)));
        assert_eq!(f.effective_degree(), Some(2));
    }

    #[test]
    fn json_round_trip() {
        let f = TargetFunction::from_builtin(Builtin::SignSmooth, P);
        let j = f.to_json();
        let s = serde_json::to_string(&j).unwrap();
        let j2: TargetJson = serde_json::from_str(&s).unwrap();
        let f2 = TargetFunction::from_json(&j2, P).unwrap();
        let x = Real::from_f64(0.12, P);
        assert!(f.eval(&x).sub(&f2.eval(&x), P).abs().lt(&Real::pow2(-150, P)));
    }
}

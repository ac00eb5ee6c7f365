//! Arbitrary-precision real numbers used throughout the crate.
//!
//! Thin wrapper around [`astro_float::BigFloat`] that carries the working
//! precision explicitly at every call site. Certified code paths use the
//! directed-rounding helpers (`*_up`, `*_down`) to produce one-sided bounds.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

const RM: RoundingMode = RoundingMode::ToEven;

/// An arbitrary-precision real number.
#[derive(Clone, Debug)]
pub struct Real(BigFloat);

impl Real {
    pub fn zero() -> Self {
        Real(BigFloat::from_i8(0, 64))
    }

    pub fn one() -> Self {
        Real(BigFloat::from_i8(1, 64))
    }

    pub fn from_f64(v: f64, p: usize) -> Self {
        Real(BigFloat::from_f64(v, p))
    }

    pub fn from_i64(v: i64, p: usize) -> Self {
        Real(BigFloat::from_i64(v, p))
    }

    pub fn from_u64(v: u64, p: usize) -> Self {
        Real(BigFloat::from_u64(v, p))
    }

    /// Parses a decimal string such as `-1.25e-40`.
    pub fn parse(s: &str, p: usize) -> Option<Self> {
        let v = CONSTS.with(|c| BigFloat::parse(s, Radix::Dec, p, RM, &mut c.borrow_mut()));
        if v.is_nan() {
            return None;
        }
        Some(Real(v))
    }

    /// 2^k as an exact value.
    pub fn pow2(k: i64, p: usize) -> Self {
        let two = BigFloat::from_i8(2, p);
        if k >= 0 {
            Real(two.powi(k as usize, p, RM))
        } else {
            let d = two.powi((-k) as usize, p, RM);
            Real(BigFloat::from_i8(1, p).div(&d, p, RM))
        }
    }

    pub fn pi(p: usize) -> Self {
        Real(CONSTS.with(|c| c.borrow_mut().pi(p, RM)))
    }

    pub fn add(&self, o: &Self, p: usize) -> Self {
        Real(self.0.add(&o.0, p, RM))
    }

    pub fn add_up(&self, o: &Self, p: usize) -> Self {
        Real(self.0.add(&o.0, p, RoundingMode::Up))
    }

    pub fn sub(&self, o: &Self, p: usize) -> Self {
        Real(self.0.sub(&o.0, p, RM))
    }

    pub fn sub_down(&self, o: &Self, p: usize) -> Self {
        Real(self.0.sub(&o.0, p, RoundingMode::Down))
    }

    pub fn mul(&self, o: &Self, p: usize) -> Self {
        Real(self.0.mul(&o.0, p, RM))
    }

    pub fn mul_up(&self, o: &Self, p: usize) -> Self {
        Real(self.0.mul(&o.0, p, RoundingMode::Up))
    }

    pub fn div(&self, o: &Self, p: usize) -> Self {
        Real(self.0.div(&o.0, p, RM))
    }

    pub fn div_up(&self, o: &Self, p: usize) -> Self {
        Real(self.0.div(&o.0, p, RoundingMode::Up))
    }

    pub fn neg(&self) -> Self {
        Real(self.0.neg())
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn powi(&self, k: usize, p: usize) -> Self {
        Real(self.0.powi(k, p, RM))
    }

    pub fn powi_up(&self, k: usize, p: usize) -> Self {
        Real(self.0.powi(k, p, RoundingMode::Up))
    }

    /// General power x^y = exp(y ln x); requires `self > 0`.
    pub fn pow(&self, y: &Self, p: usize) -> Self {
        Real(CONSTS.with(|c| self.0.pow(&y.0, p, RM, &mut c.borrow_mut())))
    }

    pub fn exp(&self, p: usize) -> Self {
        Real(CONSTS.with(|c| self.0.exp(p, RM, &mut c.borrow_mut())))
    }

    pub fn ln(&self, p: usize) -> Self {
        Real(CONSTS.with(|c| self.0.ln(p, RM, &mut c.borrow_mut())))
    }

    pub fn sqrt(&self, p: usize) -> Self {
        Real(self.0.sqrt(p, RM))
    }

    pub fn sin(&self, p: usize) -> Self {
        Real(CONSTS.with(|c| self.0.sin(p, RM, &mut c.borrow_mut())))
    }

    pub fn cos(&self, p: usize) -> Self {
        Real(CONSTS.with(|c| self.0.cos(p, RM, &mut c.borrow_mut())))
    }

    pub fn asin(&self, p: usize) -> Self {
        Real(CONSTS.with(|c| self.0.asin(p, RM, &mut c.borrow_mut())))
    }

    pub fn tanh(&self, p: usize) -> Self {
        Real(CONSTS.with(|c| self.0.tanh(p, RM, &mut c.borrow_mut())))
    }

    pub fn floor(&self) -> Self {
        Real(self.0.floor())
    }

    pub fn ceil(&self) -> Self {
        Real(self.0.ceil())
    }

    pub fn min(&self, o: &Self) -> Self {
        if self.le(o) {
            self.clone()
        } else {
            o.clone()
        }
    }

    pub fn max(&self, o: &Self) -> Self {
        if self.ge(o) {
            self.clone()
        } else {
            o.clone()
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_nan(&self) -> bool {
        self.0.is_nan()
    }

    pub fn is_negative(&self) -> bool {
        self.0.sign() == Some(Sign::Neg) && !self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.sign() == Some(Sign::Pos) && !self.0.is_zero()
    }

    /// Sign as -1 / 0 / +1.
    pub fn signum_i(&self) -> i8 {
        if self.is_zero() {
            0
        } else if self.is_negative() {
            -1
        } else {
            1
        }
    }

    pub fn cmp_total(&self, o: &Self) -> Ordering {
        self.0.partial_cmp(&o.0).expect("NaN in comparison")
    }

    pub fn lt(&self, o: &Self) -> bool {
        self.cmp_total(o) == Ordering::Less
    }

    pub fn le(&self, o: &Self) -> bool {
        self.cmp_total(o) != Ordering::Greater
    }

    pub fn gt(&self, o: &Self) -> bool {
        self.cmp_total(o) == Ordering::Greater
    }

    pub fn ge(&self, o: &Self) -> bool {
        self.cmp_total(o) != Ordering::Less
    }

    /// Nearest f64 (through the decimal representation; used only at
    /// reporting boundaries, never inside certified computations).
    pub fn to_f64(&self) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        format!("{}", self.0).parse::<f64>().unwrap_or(f64::NAN)
    }

    /// Full-precision decimal string (round-trips through [`Real::parse`]).
    pub fn to_decimal(&self) -> String {
        format!("{}", self.0)
    }

    /// Integer value as u64; `None` if not an exact small integer.
    pub fn to_u64(&self) -> Option<u64> {
        let f = self.0.floor();
        if f != self.0 {
            return None;
        }
        let s = format!("{}", f);
        // Display emits mantissa.eEXP; reconstruct the integer digits.
        parse_display_integer(&s)
    }

    pub fn exponent_bits(&self) -> Option<i64> {
        self.0.exponent().map(|e| e as i64)
    }
}

/// Parses astro-float's scientific-notation display of an integer value.
fn parse_display_integer(s: &str) -> Option<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    let (mant, exp) = s.split_once(['e', 'E'])?;
    let exp: i64 = exp.parse().ok()?;
    let neg = mant.starts_with('-');
    let mant = mant.trim_start_matches('-');
    if neg {
        return None;
    }
    let (int_part, frac_part) = match mant.split_once('.') {
        Some((a, b)) => (a, b),
        None => (mant, ""),
    };
    let digits: String = format!("{int_part}{frac_part}");
    let point = int_part.len() as i64 + exp;
    if point < digits.trim_end_matches('0').len() as i64 {
        return None;
    }
    let mut out = digits.trim_end_matches('0').to_string();
    while (out.len() as i64) < point {
        out.push('0');
    }
    if out.is_empty() {
        return Some(0);
    }
    out.parse().ok()
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0 == other.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_roundtrip() {
        let p = 256;
        let a = Real::parse("0.2", p).unwrap();
        let b = Real::from_f64(3.0, p);
        let c = a.mul(&b, p);
        let expect = Real::parse("0.6", p).unwrap();
        assert!(c.sub(&expect, p).abs().lt(&Real::pow2(-250, p)));
        let s = c.to_decimal();
        let back = Real::parse(&s, p).unwrap();
        assert_eq!(back.cmp_total(&c), Ordering::Equal);
    }

    #[test]
    fn huge_exponents() {
        let p = 256;
        let v = Real::from_i64(-9000, p).exp(p);
        assert!(v.is_positive());
        assert!(v.lt(&Real::pow2(-12000, p)));
    }

    #[test]
    fn integer_extraction() {
        let p = 256;
        assert_eq!(Real::from_u64(12375, p).to_u64(), Some(12375));
        assert_eq!(Real::from_f64(12.5, p).to_u64(), None);
        let big = Real::from_u64(3, p).powi(40, p);
        assert_eq!(big.to_u64(), Some(3u64.pow(40)));
    }

    #[test]
    fn directed_rounding_orders() {
        let p = 64;
        let a = Real::from_f64(1.0, p).div(&Real::from_f64(3.0, p), p);
        let up = Real::from_f64(1.0, p).div_up(&Real::from_f64(3.0, p), p);
        assert!(up.ge(&a));
    }
}

//! Numeric constants carried inside expression trees.
//!
//! Constants are exact rationals whenever possible. Arithmetic that would
//! overflow the 64-bit rational representation degrades to `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, One, Signed, ToPrimitive, Zero};

/// A constant: exact rational or IEEE double.
#[derive(Debug, Clone, Copy)]
pub enum Num {
    Rational(Rational64),
    Float(f64),
}

impl Num {
    pub fn int(value: i64) -> Self {
        Num::Rational(Rational64::from_integer(value))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Num::Rational(Rational64::new(numer, denom))
    }

    /// Wraps a float, normalizing `-0.0` to `0.0` so hashing and ordering agree with equality.
    pub fn float(value: f64) -> Self {
        Num::Float(if value == 0.0 { 0.0 } else { value })
    }

    pub fn zero() -> Self {
        Num::int(0)
    }

    pub fn one() -> Self {
        Num::int(1)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Num::Float(f) => *f,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Num::Rational(r) => r.is_zero(),
            Num::Float(f) => *f == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Num::Rational(r) => r.is_one(),
            Num::Float(f) => *f == 1.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Num::Rational(r) => r.is_negative(),
            Num::Float(f) => *f < 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Num::Rational(_))
    }

    pub fn as_rational(&self) -> Option<Rational64> {
        match self {
            Num::Rational(r) => Some(*r),
            Num::Float(_) => None,
        }
    }

    pub fn add(&self, other: &Num) -> Num {
        match (self, other) {
            (Num::Rational(a), Num::Rational(b)) => match a.checked_add(b) {
                Some(r) => Num::Rational(r),
                None => Num::float(self.to_f64() + other.to_f64()),
            },
            _ => Num::float(self.to_f64() + other.to_f64()),
        }
    }

    pub fn mul(&self, other: &Num) -> Num {
        match (self, other) {
            (Num::Rational(a), Num::Rational(b)) => match a.checked_mul(b) {
                Some(r) => Num::Rational(r),
                None => Num::float(self.to_f64() * other.to_f64()),
            },
            _ => Num::float(self.to_f64() * other.to_f64()),
        }
    }

    pub fn neg(&self) -> Num {
        match self {
            Num::Rational(r) => match r.numer().checked_neg() {
                Some(n) => Num::Rational(Rational64::new_raw(n, *r.denom())),
                None => Num::float(-self.to_f64()),
            },
            Num::Float(f) => Num::float(-f),
        }
    }

    /// Integer power. Returns `None` for `0^negative`.
    pub fn powi(&self, exp: i64) -> Option<Num> {
        if exp < 0 && self.is_zero() {
            return None;
        }
        match self {
            Num::Rational(r) => Some(
                rational_pow(*r, exp)
                    .map_or_else(|| Num::float(self.to_f64().powf(exp as f64)), Num::Rational),
            ),
            Num::Float(f) => Some(Num::float(f.powf(exp as f64))),
        }
    }
}

fn rational_pow(base: Rational64, exp: i64) -> Option<Rational64> {
    let magnitude = u32::try_from(exp.unsigned_abs()).ok()?;
    let mut acc = Rational64::one();
    for _ in 0..magnitude {
        acc = acc.checked_mul(&base)?;
    }
    if exp < 0 {
        if acc.is_zero() {
            return None;
        }
        // recip() panics only on zero; normalize sign through the constructor
        let (n, d) = (*acc.numer(), *acc.denom());
        if n == i64::MIN {
            return None;
        }
        Some(Rational64::new(d, n))
    } else {
        Some(acc)
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Num {}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

// Structural order: every rational sorts before every float.
impl Ord for Num {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Num::Rational(a), Num::Rational(b)) => a.cmp(b),
            (Num::Float(a), Num::Float(b)) => a.total_cmp(b),
            (Num::Rational(_), Num::Float(_)) => Ordering::Less,
            (Num::Float(_), Num::Rational(_)) => Ordering::Greater,
        }
    }
}

impl Hash for Num {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            Num::Rational(r) => {
                0u8.hash(state);
                r.numer().hash(state);
                r.denom().hash(state);
            }
            Num::Float(f) => {
                1u8.hash(state);
                f.to_bits().hash(state);
            }
        }
    }
}

/// Surface syntax accepted back by the parser:
/// integers and terminating decimals print as decimals, other rationals
/// as `n/d`, floats in exponent notation (which the parser reads as float).
impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Rational(r) => match terminating_decimal(*r) {
                Some(s) => f.write_str(&s),
                None => write!(f, "{}/{}", r.numer(), r.denom()),
            },
            Num::Float(x) => write!(f, "{x:e}"),
        }
    }
}

fn terminating_decimal(r: Rational64) -> Option<String> {
    let mut denom = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while denom % 2 == 0 {
        denom /= 2;
        twos += 1;
    }
    while denom % 5 == 0 {
        denom /= 5;
        fives += 1;
    }
    if denom != 1 {
        return None;
    }
    let places = twos.max(fives);
    if places == 0 {
        return Some(r.numer().to_string());
    }
    let scale = 10i128.checked_pow(places)?;
    let scaled = i128::from(*r.numer()) * (scale / i128::from(*r.denom()));
    let sign = if scaled < 0 { "-" } else { "" };
    let abs = scaled.unsigned_abs();
    let int_part = abs / scale as u128;
    let frac_part = abs % scale as u128;
    Some(format!(
        "{sign}{int_part}.{frac_part:0width$}",
        width = places as usize
    ))
}

impl From<i64> for Num {
    fn from(value: i64) -> Self {
        Num::int(value)
    }
}

impl From<Rational64> for Num {
    fn from(value: Rational64) -> Self {
        Num::Rational(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_display() {
        assert_eq!(Num::ratio(1, 2).to_string(), "0.5");
        assert_eq!(Num::ratio(-1, 8).to_string(), "-0.125");
        assert_eq!(Num::ratio(9, 4).to_string(), "2.25");
        assert_eq!(Num::ratio(1, 3).to_string(), "1/3");
        assert_eq!(Num::int(-7).to_string(), "-7");
        assert_eq!(Num::float(1.5).to_string(), "1.5e0");
    }

    #[test]
    fn overflow_degrades_to_float() {
        let big = Num::int(i64::MAX / 2);
        let sum = big.add(&big).add(&big);
        assert!(!sum.is_exact());
        assert!((sum.to_f64() - 1.5 * (i64::MAX as f64)).abs() / sum.to_f64() < 1e-12);
    }

    #[test]
    fn powers() {
        assert_eq!(Num::ratio(2, 3).powi(-2), Some(Num::ratio(9, 4)));
        assert_eq!(Num::zero().powi(-1), None);
        assert_eq!(Num::int(-2).powi(3), Some(Num::int(-8)));
        assert_eq!(Num::int(5).powi(0), Some(Num::one()));
    }

    #[test]
    fn negative_zero_normalized() {
        assert_eq!(Num::float(-0.0), Num::float(0.0));
    }
}

//! Exact rationals of the form `p / m^k` and their base-`m` digit expansions.
//!
//! Every coordinate the construction touches at a finite level is such a
//! number. Limits of digit streams with a constant tail (for example
//! `0.111...` in base 4, which is `1/3`) are not grid rationals, so values
//! of expansions are reported as [`BigRational`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Default grid order.
pub const DEFAULT_BASE: u32 = 4;

/// `numer / base^log_den`, always stored in canonical form: `numer` is not
/// divisible by `base` unless `log_den == 0`.
#[derive(Clone, Debug)]
pub struct GridRational {
    numer: BigUint,
    log_den: u32,
    base: u32,
}

fn check_base(base: u32) -> Result<()> {
    if base < 2 {
        return Err(Error::UnsupportedBase(base));
    }
    Ok(())
}

pub(crate) fn pow(base: u32, exp: u32) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

impl GridRational {
    pub fn new(numer: impl Into<BigUint>, log_den: u32, base: u32) -> Result<Self> {
        check_base(base)?;
        let mut numer = numer.into();
        let mut log_den = log_den;
        let b = BigUint::from(base);
        while log_den > 0 && !numer.is_zero() && (&numer % &b).is_zero() {
            numer /= &b;
            log_den -= 1;
        }
        if numer.is_zero() {
            log_den = 0;
        }
        Ok(GridRational {
            numer,
            log_den,
            base,
        })
    }

    /// A coordinate: like [`GridRational::new`] but rejects values above 1.
    pub fn unit(numer: impl Into<BigUint>, log_den: u32, base: u32) -> Result<Self> {
        let r = Self::new(numer, log_den, base)?;
        if !r.in_unit_interval() {
            return Err(Error::OutOfUnitInterval {
                value: r.to_string(),
            });
        }
        Ok(r)
    }

    pub fn zero(base: u32) -> Self {
        Self::new(0u32, 0, base).expect("base checked by caller")
    }

    pub fn one(base: u32) -> Self {
        Self::new(1u32, 0, base).expect("base checked by caller")
    }

    /// `0.d_1 d_2 ... d_n` in base `base`.
    pub fn from_digits(digits: &[u32], base: u32) -> Result<Self> {
        check_base(base)?;
        let mut numer = BigUint::zero();
        for &d in digits {
            if d >= base {
                return Err(Error::DigitOutOfRange { digit: d, base });
            }
            numer = numer * base + d;
        }
        Self::new(numer, digits.len() as u32, base)
    }

    /// Exact conversion of a rational whose reduced denominator divides some
    /// power of `base`. Returns `None` otherwise or for negative values.
    pub fn from_ratio(r: &BigRational, base: u32) -> Option<Self> {
        if base < 2 || r.numer().sign() == num_bigint::Sign::Minus {
            return None;
        }
        let numer = r.numer().to_biguint()?;
        let den = r.denom().to_biguint()?;
        // every prime factor of den must divide base; the exponent needed is
        // at most the bit length of den
        let mut k = 0u32;
        let mut scale = BigUint::one();
        let limit = den.bits() as u32 + 1;
        while !(&scale % &den).is_zero() {
            k += 1;
            if k > limit {
                return None;
            }
            scale *= base;
        }
        Self::new(numer * (scale / den), k, base).ok()
    }

    /// Exact value of a finite `f64`, when `base` is a power of two.
    pub fn from_f64(v: f64, base: u32) -> Option<Self> {
        let r = BigRational::from_float(v)?;
        Self::from_ratio(&r, base)
    }

    pub fn numer(&self) -> &BigUint {
        &self.numer
    }

    pub fn log_den(&self) -> u32 {
        self.log_den
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    pub fn denom(&self) -> BigUint {
        pow(self.base, self.log_den)
    }

    pub fn is_zero(&self) -> bool {
        self.numer.is_zero()
    }

    pub fn in_unit_interval(&self) -> bool {
        self.numer <= self.denom()
    }

    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(BigInt::from(self.numer.clone()), BigInt::from(self.denom()))
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(&self.to_ratio())
    }

    /// The terminating digit string `d_1 .. d_k` (empty for integers).
    pub fn terminating_digits(&self) -> Vec<u32> {
        let mut digits = vec![0u32; self.log_den as usize];
        let (_, mut frac) = self.numer.div_rem(&self.denom());
        for slot in digits.iter_mut().rev() {
            let (q, r) = frac.div_rem(&BigUint::from(self.base));
            *slot = r.to_u32().expect("digit below base");
            frac = q;
        }
        digits
    }

    /// `self + base^(-level)`.
    pub fn add_ulp(&self, level: u32) -> Self {
        let k = self.log_den.max(level);
        let numer = &self.numer * pow(self.base, k - self.log_den) + pow(self.base, k - level);
        Self::new(numer, k, self.base).expect("base already valid")
    }

    /// `self - base^(-level)`, or `None` if that would be negative.
    pub fn sub_ulp(&self, level: u32) -> Option<Self> {
        let k = self.log_den.max(level);
        let lhs = &self.numer * pow(self.base, k - self.log_den);
        let rhs = pow(self.base, k - level);
        if lhs < rhs {
            return None;
        }
        Self::new(lhs - rhs, k, self.base).ok()
    }
}

pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Ord for GridRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = &self.numer * pow(other.base, other.log_den);
        let rhs = &other.numer * pow(self.base, self.log_den);
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for GridRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for GridRational {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for GridRational {}

impl fmt::Display for GridRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}^{}", self.numer, self.base, self.log_den)
    }
}

/// What follows the finite prefix of an expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Tail {
    /// All zeros.
    Terminating,
    /// All `base - 1`.
    RepeatingTop,
    /// The given digit forever.
    Repeating(u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Expansion {
    pub base: u32,
    pub prefix: Vec<u32>,
    pub tail: Tail,
}

impl Expansion {
    pub fn new(base: u32, prefix: Vec<u32>, tail: Tail) -> Result<Self> {
        check_base(base)?;
        if let Some(&d) = prefix.iter().find(|&&d| d >= base) {
            return Err(Error::DigitOutOfRange { digit: d, base });
        }
        if let Tail::Repeating(d) = tail {
            if d >= base {
                return Err(Error::DigitOutOfRange { digit: d, base });
            }
        }
        Ok(Expansion { base, prefix, tail })
    }

    pub fn tail_digit(&self) -> u32 {
        match self.tail {
            Tail::Terminating => 0,
            Tail::RepeatingTop => self.base - 1,
            Tail::Repeating(d) => d,
        }
    }

    /// Digit at 1-based position `i`.
    pub fn digit(&self, i: usize) -> u32 {
        assert!(i >= 1, "digit positions start at 1");
        self.prefix
            .get(i - 1)
            .copied()
            .unwrap_or_else(|| self.tail_digit())
    }

    /// The first `n` digits.
    pub fn digits(&self, n: usize) -> Vec<u32> {
        (1..=n).map(|i| self.digit(i)).collect()
    }

    /// Exact value, tail summed in closed form.
    pub fn value(&self) -> BigRational {
        let head = GridRational::from_digits(&self.prefix, self.base)
            .expect("digits validated on construction")
            .to_ratio();
        let tail = geometric_tail(self.tail_digit(), self.prefix.len() as u32 + 1, self.base)
            .expect("digits validated on construction");
        head + tail
    }
}

/// `sum_{i >= start} d * m^(-i) = d * m^(-(start-1)) / (m-1)`.
pub fn geometric_tail(d: u32, start: u32, m: u32) -> Result<BigRational> {
    check_base(m)?;
    if d >= m {
        return Err(Error::DigitOutOfRange { digit: d, base: m });
    }
    if start < 1 {
        return Err(Error::InvalidArgument(
            "tail start index must be at least 1".into(),
        ));
    }
    Ok(BigRational::new(
        BigInt::from(d),
        BigInt::from(pow(m, start - 1) * (m - 1)),
    ))
}

/// All base-`m` expansions of `t`: two for `t = p/m^k` in `(0, 1)` with
/// `k > 0`, one for `0` and `1`.
pub fn expansions(t: &GridRational) -> Result<Vec<Expansion>> {
    if !t.in_unit_interval() {
        return Err(Error::OutOfUnitInterval {
            value: t.to_string(),
        });
    }
    let base = t.base;
    if t.is_zero() {
        return Ok(vec![Expansion::new(base, vec![], Tail::Terminating)?]);
    }
    if t.log_den == 0 {
        // t == 1
        return Ok(vec![Expansion::new(base, vec![], Tail::RepeatingTop)?]);
    }
    let digits = t.terminating_digits();
    let mut lowered = digits.clone();
    // canonical form guarantees the last digit is nonzero
    *lowered.last_mut().expect("log_den > 0") -= 1;
    Ok(vec![
        Expansion::new(base, digits, Tail::Terminating)?,
        Expansion::new(base, lowered, Tail::RepeatingTop)?,
    ])
}

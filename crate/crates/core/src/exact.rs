//! Exact rational evaluation for `p = 1`, `p = 2` and `p = inf`.
//!
//! For `p = 2` a moment is kept as its square, so every quantity is a
//! rational or the square root of one. Signs of `lhs - rhs` are decided
//! exactly by [`sign_of_sqrt_minus_sum`].

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::{check_len, DiscreteMeasure, Exponent};

pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn integer(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats as `num/den`, always with an explicit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// The exact binary value of a finite float.
pub fn from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::InvalidArgument(format!("{x} is not finite")))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// A probability vector with rational weights summing exactly to one.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactMeasure {
    weights: Vec<Rational>,
}

impl ExactMeasure {
    pub fn new(weights: Vec<Rational>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(Error::InvalidMeasure("negative weight".into()));
        }
        let total: Rational = weights.iter().sum();
        if !total.is_one() {
            return Err(Error::InvalidMeasure(format!("weights sum to {}, not 1", format_rational(&total))));
        }
        Ok(Self { weights })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        Ok(Self { weights: vec![rational(1, n as i64); n] })
    }

    /// Exact binary values of the float weights, renormalized so the total
    /// is exactly one.
    pub fn from_measure(mu: &DiscreteMeasure) -> Result<Self> {
        let raw = mu.weights().iter().map(|w| from_f64(*w)).collect::<Result<Vec<_>>>()?;
        let total: Rational = raw.iter().sum();
        if total.is_zero() {
            return Err(Error::InvalidMeasure("zero total mass".into()));
        }
        Self::new(raw.into_iter().map(|w| w / &total).collect())
    }

    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        DiscreteMeasure::new(self.weights.iter().map(to_f64).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }
}

pub fn from_f64_slice(values: &[f64]) -> Result<Vec<Rational>> {
    values.iter().map(|v| from_f64(*v)).collect()
}

pub fn expectation(f: &[Rational], mu: &ExactMeasure) -> Result<Rational> {
    check_len(mu.len(), f.len())?;
    Ok(f.iter().zip(mu.weights()).map(|(v, w)| v * w).sum())
}

pub fn sup_norm(f: &[Rational]) -> Rational {
    f.iter().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
}

pub fn product(f: &[Rational], g: &[Rational]) -> Result<Vec<Rational>> {
    check_len(f.len(), g.len())?;
    Ok(f.iter().zip(g).map(|(a, b)| a * b).collect())
}

pub fn reciprocal(f: &[Rational]) -> Result<Vec<Rational>> {
    f.iter()
        .enumerate()
        .map(|(index, v)| if v.is_zero() { Err(Error::NotInvertible { index }) } else { Ok(v.recip()) })
        .collect()
}

/// A nonnegative real that is either rational or the square root of a rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactNorm {
    Plain(Rational),
    Sqrt(Rational),
}

impl ExactNorm {
    /// The radicand `s` with value `sqrt(s)`.
    pub fn squared(&self) -> Rational {
        match self {
            ExactNorm::Plain(v) => v * v,
            ExactNorm::Sqrt(s) => s.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ExactNorm::Plain(v) => to_f64(v),
            ExactNorm::Sqrt(s) => to_f64(s).sqrt(),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            ExactNorm::Plain(v) => Some(v),
            ExactNorm::Sqrt(_) => None,
        }
    }
}

impl fmt::Display for ExactNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactNorm::Plain(v) => f.write_str(&format_rational(v)),
            ExactNorm::Sqrt(s) => write!(f, "sqrt({})", format_rational(s)),
        }
    }
}

/// Weighted `L^p(mu)` norm for `p` in `{1, 2, inf}`.
pub fn p_norm(f: &[Rational], mu: &ExactMeasure, p: Exponent) -> Result<ExactNorm> {
    check_len(mu.len(), f.len())?;
    let pairs = f.iter().zip(mu.weights());
    match p {
        Exponent::Infinity => Ok(ExactNorm::Plain(
            pairs.filter(|(_, w)| w.is_positive()).map(|(v, _)| v.abs()).max().unwrap_or_else(Rational::zero),
        )),
        p if p == Exponent::ONE => Ok(ExactNorm::Plain(pairs.map(|(v, w)| v.abs() * w).sum())),
        p if p == Exponent::TWO => Ok(ExactNorm::Sqrt(pairs.map(|(v, w)| v * v * w).sum())),
        p => Err(Error::UnsupportedExponent(p.to_string())),
    }
}

pub fn centered(f: &[Rational], mu: &ExactMeasure) -> Result<Vec<Rational>> {
    let mean = expectation(f, mu)?;
    Ok(f.iter().map(|v| v - &mean).collect())
}

pub fn centered_moment(f: &[Rational], mu: &ExactMeasure, p: Exponent) -> Result<ExactNorm> {
    p_norm(&centered(f, mu)?, mu, p)
}

/// Sign of `sqrt(l) - sum_i c_i sqrt(s_i)` for at most two terms with
/// `c_i >= 0`, `s_i >= 0`, `l >= 0`.
pub fn sign_of_sqrt_minus_sum(l: &Rational, terms: &[(Rational, Rational)]) -> Ordering {
    match terms {
        [] => l.cmp(&Rational::zero()),
        [(a, s)] => l.cmp(&(a * a * s)),
        [(a, s), (b, t)] => {
            // sqrt(l) vs a sqrt(s) + b sqrt(t); square both sides.
            let cross_sq = integer(4) * a * a * b * b * s * t;
            let d = l - a * a * s - b * b * t;
            if d.is_negative() {
                Ordering::Less
            } else if d.is_zero() {
                if cross_sq.is_zero() {
                    Ordering::Equal
                } else {
                    Ordering::Less
                }
            } else {
                (&d * &d).cmp(&cross_sq)
            }
        }
        _ => panic!("sign_of_sqrt_minus_sum supports at most two terms"),
    }
}

/// Exact certificate for one inequality instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactDefect {
    /// Sign of `lhs - rhs`: `-1`, `0` or `1`.
    pub sign: i8,
    pub lhs: String,
    pub rhs: String,
    /// `lhs - rhs` as `num/den` when both sides are rational.
    pub defect: Option<String>,
}

impl ExactDefect {
    fn build(lhs: ExactNorm, terms: Vec<(Rational, ExactNorm)>) -> Self {
        let radicals: Vec<(Rational, Rational)> = terms.iter().map(|(c, n)| (c.clone(), n.squared())).collect();
        let sign = match sign_of_sqrt_minus_sum(&lhs.squared(), &radicals) {
            Ordering::Less => -1,
            Ordering::Equal => 0,
            Ordering::Greater => 1,
        };
        let rhs_text = if terms.is_empty() {
            "0/1".to_string()
        } else {
            terms.iter().map(|(c, n)| format!("{}*{}", format_rational(c), n)).collect::<Vec<_>>().join(" + ")
        };
        let defect = lhs.as_rational().and_then(|l| {
            terms
                .iter()
                .map(|(c, n)| n.as_rational().map(|v| c * v))
                .sum::<Option<Rational>>()
                .map(|r| format_rational(&(l - r)))
        });
        Self { sign, lhs: lhs.to_string(), rhs: rhs_text, defect }
    }

    pub fn holds(&self) -> bool {
        self.sign <= 0
    }
}

/// `sigma_p(fg)` against `||f|| sigma_p(g) + ||g|| sigma_p(f)`.
pub fn leibniz_defect(f: &[Rational], g: &[Rational], mu: &ExactMeasure, p: Exponent) -> Result<ExactDefect> {
    let fg = product(f, g)?;
    let lhs = centered_moment(&fg, mu, p)?;
    let terms = vec![(sup_norm(f), centered_moment(g, mu, p)?), (sup_norm(g), centered_moment(f, mu, p)?)];
    Ok(ExactDefect::build(lhs, terms))
}

/// `sigma_p(1/f)` against `||1/f||² sigma_p(f)`.
pub fn strong_leibniz_defect(f: &[Rational], mu: &ExactMeasure, p: Exponent) -> Result<ExactDefect> {
    let inv = reciprocal(f)?;
    let lhs = centered_moment(&inv, mu, p)?;
    let s = sup_norm(&inv);
    Ok(ExactDefect::build(lhs, vec![(&s * &s, centered_moment(f, mu, p)?)]))
}

/// The vector `f E x - E(fx)·1`.
pub fn auxiliary_vector(f: &[Rational], x: &[Rational], mu: &ExactMeasure) -> Result<Vec<Rational>> {
    let ex = expectation(x, mu)?;
    let efx = expectation(&product(f, x)?, mu)?;
    Ok(f.iter().map(|v| v * &ex - &efx).collect())
}

/// `||f E x - E(fx)||_p` against `||x|| sigma_p(f)`.
pub fn auxiliary_defect(f: &[Rational], x: &[Rational], mu: &ExactMeasure, p: Exponent) -> Result<ExactDefect> {
    let lhs = p_norm(&auxiliary_vector(f, x, mu)?, mu, p)?;
    Ok(ExactDefect::build(lhs, vec![(sup_norm(x), centered_moment(f, mu, p)?)]))
}

/// `sigma_p(f²)` against `2||f|| sigma_p(f)`.
pub fn square_defect(f: &[Rational], mu: &ExactMeasure, p: Exponent) -> Result<ExactDefect> {
    let sq = product(f, f)?;
    let lhs = centered_moment(&sq, mu, p)?;
    Ok(ExactDefect::build(lhs, vec![(integer(2) * sup_norm(f), centered_moment(f, mu, p)?)]))
}

//! Finite probability spaces, weighted p-norms and centered moments.
//!
//! A [`DiscreteMeasure`] is a probability vector over `n` atoms and a
//! [`RandomVariable`] is a coordinate vector over the same atoms. The
//! centered moment of order `p` is
//!
//! ```text
//! sigma_p(f; mu) = ( sum_i mu_i |f_i - E f|^p )^(1/p),   sigma_inf = ess sup |f - E f|
//! ```
//!
//! where the essential supremum only looks at atoms of positive weight.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Allowed deviation of the total mass from 1.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// An exponent `p` in `[1, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub const ONE: Exponent = Exponent::Finite(1.0);
    pub const TWO: Exponent = Exponent::Finite(2.0);

    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        if p.is_infinite() {
            Ok(Exponent::Infinity)
        } else {
            Ok(Exponent::Finite(p))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// `p` as a float, `f64::INFINITY` for the sup exponent.
    pub fn value(&self) -> f64 {
        match *self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }

    /// The conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(&self) -> Exponent {
        match *self {
            Exponent::Infinity => Exponent::ONE,
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    /// `p = 1`, `p = 2` and `p = inf` admit exact rational evaluation.
    pub fn is_exact_supported(&self) -> bool {
        matches!(*self, Exponent::Infinity) || *self == Exponent::ONE || *self == Exponent::TWO
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            _ => {
                let p: f64 = t.parse().map_err(|_| Error::InvalidArgument(format!("cannot parse exponent {t:?}")))?;
                Exponent::new(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A probability vector on finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidMeasure(format!("weight {w} is negative or not finite")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    /// The uniform distribution `lambda_n`.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMeasure("measure needs at least one atom".into()));
        }
        Ok(Self { weights: vec![1.0 / n as f64; n] })
    }

    /// Normalizes nonnegative masses into a probability vector.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total > 0.0) || masses.iter().any(|m| *m < 0.0 || !m.is_finite()) {
            return Err(Error::InvalidMeasure("masses must be nonnegative with positive total".into()));
        }
        Self::new(masses.iter().map(|m| m / total).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_uniform(&self) -> bool {
        let u = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - u).abs() <= WEIGHT_SUM_TOLERANCE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarField {
    Real,
    Complex,
}

/// A bounded function on the atoms of a finite probability space.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVariable {
    values: Vec<Complex64>,
    field: ScalarField,
}

impl RandomVariable {
    pub fn real(values: Vec<f64>) -> Self {
        Self { values: values.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), field: ScalarField::Real }
    }

    pub fn complex(values: Vec<Complex64>) -> Self {
        Self { values, field: ScalarField::Complex }
    }

    pub fn constant(c: f64, n: usize) -> Self {
        Self::real(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn field(&self) -> ScalarField {
        self.field
    }

    pub fn is_real(&self) -> bool {
        self.field == ScalarField::Real
    }

    /// Real parts, or an error if the variable carries the complex tag.
    pub fn real_values(&self) -> Result<Vec<f64>> {
        if !self.is_real() {
            return Err(Error::ComplexNotAllowed);
        }
        Ok(self.values.iter().map(|v| v.re).collect())
    }

    fn combined_field(&self, other: &Self) -> ScalarField {
        if self.is_real() && other.is_real() {
            ScalarField::Real
        } else {
            ScalarField::Complex
        }
    }

    /// Pointwise product `fg`.
    pub fn product(&self, other: &Self) -> Result<Self> {
        check_len(self.len(), other.len())?;
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
            field: self.combined_field(other),
        })
    }

    /// Pointwise reciprocal `1/f`.
    pub fn reciprocal(&self) -> Result<Self> {
        if let Some(index) = self.values.iter().position(|v| v.norm() == 0.0) {
            return Err(Error::NotInvertible { index });
        }
        Ok(Self { values: self.values.iter().map(|v| v.inv()).collect(), field: self.field })
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        let field = if alpha.im == 0.0 { self.field } else { ScalarField::Complex };
        Self { values: self.values.iter().map(|v| v * alpha).collect(), field }
    }

    /// `f - c·1`.
    pub fn shift(&self, c: Complex64) -> Self {
        let field = if c.im == 0.0 { self.field } else { ScalarField::Complex };
        Self { values: self.values.iter().map(|v| v - c).collect(), field }
    }

    /// Pointwise square `f²`.
    pub fn square(&self) -> Self {
        Self { values: self.values.iter().map(|v| v * v).collect(), field: self.field }
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

fn check_dims(f: &RandomVariable, mu: &DiscreteMeasure) -> Result<()> {
    check_len(mu.len(), f.len())
}

/// `E f = sum_i mu_i f_i`.
pub fn expectation(f: &RandomVariable, mu: &DiscreteMeasure) -> Result<Complex64> {
    check_dims(f, mu)?;
    Ok(f.values.iter().zip(mu.weights()).map(|(v, w)| v * *w).sum())
}

/// Weighted norm of a vector of moduli.
pub(crate) fn weighted_norm(moduli: impl Iterator<Item = f64>, weights: &[f64], p: Exponent) -> f64 {
    match p {
        Exponent::Infinity => moduli.zip(weights).filter(|(_, w)| **w > 0.0).fold(0.0, |acc, (m, _)| acc.max(m)),
        Exponent::Finite(1.0) => moduli.zip(weights).map(|(m, w)| w * m).sum(),
        Exponent::Finite(2.0) => moduli.zip(weights).map(|(m, w)| w * m * m).sum::<f64>().sqrt(),
        Exponent::Finite(p) => moduli.zip(weights).map(|(m, w)| w * m.powf(p)).sum::<f64>().powf(1.0 / p),
    }
}

/// Weighted `L^p(mu)` norm; for `p = inf` the essential supremum.
pub fn p_norm(f: &RandomVariable, mu: &DiscreteMeasure, p: Exponent) -> Result<f64> {
    check_dims(f, mu)?;
    Ok(weighted_norm(f.values.iter().map(|v| v.norm()), mu.weights(), p))
}

/// Unweighted maximum modulus over all coordinates.
pub fn sup_norm(f: &RandomVariable) -> f64 {
    f.values.iter().fold(0.0, |acc, v| acc.max(v.norm()))
}

/// The centered moment `sigma_p(f; mu) = ||f - E f||_p`.
pub fn centered_moment(f: &RandomVariable, mu: &DiscreteMeasure, p: Exponent) -> Result<f64> {
    check_dims(f, mu)?;
    // Center relative to the first coordinate so constants give exactly zero.
    let reference = f.values.first().copied().unwrap_or_default();
    let offset: Complex64 = f.values.iter().zip(mu.weights()).map(|(v, w)| (v - reference) * *w).sum();
    Ok(weighted_norm(f.values.iter().map(|v| (v - reference - offset).norm()), mu.weights(), p))
}

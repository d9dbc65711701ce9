//! Majorization, extreme points of the centered unit ball, and the reduction
//! of rational measures to uniform ones by coordinate replication.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, ExactMeasure, Rational};
use crate::inequalities::leibniz_defect;
use crate::measure::{centered_moment, check_len, expectation, sup_norm, DiscreteMeasure, Exponent, RandomVariable};
use crate::report::DefectReport;

/// Absolute slack allowed in partial-sum comparisons.
pub const MAJORIZATION_TOLERANCE: f64 = 1e-12;

/// A common descending order of `f`, `g` and `fg`, if one exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderAlignment {
    /// `permutation[k]` is the index of the `k`-th largest coordinate.
    pub permutation: Vec<usize>,
    pub aligned: bool,
}

fn nonincreasing_along(values: &[f64], perm: &[usize]) -> bool {
    perm.windows(2).all(|w| values[w[0]] >= values[w[1]])
}

/// Searches for a permutation sorting `f`, `g` and `fg` descending at once.
///
/// Coordinates are sorted by `f`, ties by `g`, remaining ties by `fg`. Any
/// common order must agree with the strict order of `f`, and within a block of
/// equal `f` it must sort `g`; so this ordering succeeds whenever one exists.
pub fn same_order(f: &[f64], g: &[f64]) -> Result<OrderAlignment> {
    check_len(f.len(), g.len())?;
    let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    let mut perm: Vec<usize> = (0..f.len()).collect();
    perm.sort_by(|&i, &j| {
        f[j].partial_cmp(&f[i])
            .unwrap_or(Ordering::Equal)
            .then(g[j].partial_cmp(&g[i]).unwrap_or(Ordering::Equal))
            .then(fg[j].partial_cmp(&fg[i]).unwrap_or(Ordering::Equal))
    });
    let aligned = nonincreasing_along(f, &perm) && nonincreasing_along(g, &perm) && nonincreasing_along(&fg, &perm);
    Ok(OrderAlignment { permutation: perm, aligned })
}

fn sorted_descending(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(Ordering::Equal));
    s
}

/// `sum_{j<=k} u↓_j - sum_{j<=k} v↓_j` for `k = 1..n`.
pub fn majorization_slacks(u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_len(u.len(), v.len())?;
    let (su, sv) = (sorted_descending(u), sorted_descending(v));
    let mut acc_u = 0.0;
    let mut acc_v = 0.0;
    Ok(su
        .iter()
        .zip(&sv)
        .map(|(a, b)| {
            acc_u += a;
            acc_v += b;
            acc_u - acc_v
        })
        .collect())
}

/// Whether `v` is majorized by `u`: descending partial sums of `v` never exceed
/// those of `u`, and the totals agree.
pub fn majorizes(u: &[f64], v: &[f64]) -> Result<bool> {
    let slacks = majorization_slacks(u, v)?;
    let Some((total, partial)) = slacks.split_last() else {
        return Ok(true);
    };
    Ok(total.abs() <= MAJORIZATION_TOLERANCE && partial.iter().all(|s| *s >= -MAJORIZATION_TOLERANCE))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchurLeibnizReport {
    pub defect: DefectReport,
    pub alignment: OrderAlignment,
    /// Partial-sum slacks of `||f||(g - Eg) + ||g||(f - Ef)` over `fg - E(fg)`.
    pub slacks: Vec<f64>,
    pub majorized: bool,
}

impl SchurLeibnizReport {
    pub fn holds(&self) -> bool {
        self.majorized && self.defect.holds()
    }
}

fn centered_real(f: &[f64]) -> Vec<f64> {
    let mean = f.iter().sum::<f64>() / f.len() as f64;
    f.iter().map(|v| v - mean).collect()
}

/// Checks the majorization behind the Leibniz inequality for aligned `f`, `g`
/// on the uniform space of `n` atoms.
pub fn schur_leibniz_verify(f: &[f64], g: &[f64], n: usize, p: Exponent) -> Result<SchurLeibnizReport> {
    check_len(n, f.len())?;
    let alignment = same_order(f, g)?;
    if !alignment.aligned {
        return Err(Error::NotAligned);
    }
    let fs = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let gs = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let fc = centered_real(f);
    let gc = centered_real(g);
    let dominating: Vec<f64> = fc.iter().zip(&gc).map(|(a, b)| fs * b + gs * a).collect();
    let fg: Vec<f64> = f.iter().zip(g).map(|(a, b)| a * b).collect();
    let dominated = centered_real(&fg);
    let slacks = majorization_slacks(&dominating, &dominated)?;
    let majorized = majorizes(&dominating, &dominated)?;
    let mu = DiscreteMeasure::uniform(n)?;
    let defect = leibniz_defect(&RandomVariable::real(f.to_vec()), &RandomVariable::real(g.to_vec()), &mu, p)?;
    Ok(SchurLeibnizReport { defect, alignment, slacks, majorized })
}

/// A measure with weights `counts[i] / denominator`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalMeasure {
    pub counts: Vec<u64>,
    pub denominator: u64,
}

impl RationalMeasure {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let denominator: u64 = counts.iter().sum();
        if counts.is_empty() || denominator == 0 {
            return Err(Error::InvalidMeasure("rational measure needs positive total".into()));
        }
        Ok(Self { counts, denominator })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn to_exact(&self) -> ExactMeasure {
        let d = self.denominator as i64;
        ExactMeasure::new(self.counts.iter().map(|c| exact::rational(*c as i64, d)).collect())
            .expect("counts sum to the denominator")
    }

    pub fn to_measure(&self) -> DiscreteMeasure {
        // the float quotients can miss 1 by an ulp per atom; renormalize
        DiscreteMeasure::from_masses(&self.counts.iter().map(|c| *c as f64).collect::<Vec<_>>())
            .expect("positive total")
    }
}

const SMALL_DENOMINATOR_LIMIT: u64 = 10_000;

/// Approximates `mu` by a rational measure within `eps` per atom with total
/// exactly one.
///
/// Measures whose weights are (to 1e-12) fractions over a denominator up to
/// 10^4 are recovered exactly with the smallest such denominator. Otherwise
/// `m = ceil(1/eps)` and the counts are `floor(m mu_i)` with the remaining
/// units handed to the largest fractional parts, so every atom is off by less
/// than `1/m`.
pub fn rationalize(mu: &DiscreteMeasure, eps: f64) -> Result<RationalMeasure> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let w = mu.weights();
    let limit = SMALL_DENOMINATOR_LIMIT.min((1.0 / eps).ceil().max(1.0) as u64).max(w.len() as u64);
    for m in 1..=limit {
        let counts: Vec<f64> = w.iter().map(|x| (x * m as f64).round()).collect();
        let close = w.iter().zip(&counts).all(|(x, c)| (x * m as f64 - c).abs() <= 1e-12 * m as f64);
        if close && counts.iter().sum::<f64>() == m as f64 {
            return RationalMeasure::new(counts.iter().map(|c| *c as u64).collect());
        }
    }
    let m = (1.0 / eps).ceil() as u64;
    let scaled: Vec<f64> = w.iter().map(|x| x * m as f64).collect();
    let mut counts: Vec<u64> = scaled.iter().map(|s| s.floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&i, &j| {
        let fi = scaled[i] - scaled[i].floor();
        let fj = scaled[j] - scaled[j].floor();
        fj.partial_cmp(&fi).unwrap_or(Ordering::Equal).then(i.cmp(&j))
    });
    for &i in order.iter().take(m.saturating_sub(assigned) as usize) {
        counts[i] += 1;
    }
    RationalMeasure::new(counts)
}

/// The three moment gaps between `mu` and its rational approximation, with the
/// bound `2 ||h|| (n eps)^(1/p) + n eps ||h||` each must respect.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionCheck {
    pub eps: f64,
    pub gap_f: f64,
    pub gap_g: f64,
    pub gap_fg: f64,
    pub bound_f: f64,
    pub bound_g: f64,
    pub bound_fg: f64,
}

impl ReductionCheck {
    pub fn holds(&self) -> bool {
        self.gap_f <= self.bound_f && self.gap_g <= self.bound_g && self.gap_fg <= self.bound_fg
    }
}

/// Recomputes the moment gaps `|sigma_p(h; mu) - sigma_p(h; nu)|` for `h = f, g, fg`.
pub fn reduction_check(
    f: &RandomVariable,
    g: &RandomVariable,
    mu: &DiscreteMeasure,
    nu: &RationalMeasure,
    p: Exponent,
) -> Result<ReductionCheck> {
    let nu_f = nu.to_measure();
    check_len(mu.len(), nu_f.len())?;
    let eps = mu.weights().iter().zip(nu_f.weights()).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let n = mu.len() as f64;
    let root = match p {
        Exponent::Infinity => 1.0,
        Exponent::Finite(p) => (n * eps).powf(1.0 / p),
    };
    let bound = |h: &RandomVariable| {
        let s = sup_norm(h);
        2.0 * s * root + n * eps * s + 1e-12
    };
    let gap =
        |h: &RandomVariable| -> Result<f64> { Ok((centered_moment(h, mu, p)? - centered_moment(h, &nu_f, p)?).abs()) };
    let fg = f.product(g)?;
    Ok(ReductionCheck {
        eps,
        gap_f: gap(f)?,
        gap_g: gap(g)?,
        gap_fg: gap(&fg)?,
        bound_f: bound(f),
        bound_g: bound(g),
        bound_fg: bound(&fg),
    })
}

/// Repeats coordinate `i` exactly `counts[i]` times.
pub fn replicate_values<T: Clone>(values: &[T], nu: &RationalMeasure) -> Result<Vec<T>> {
    check_len(nu.len(), values.len())?;
    Ok(values.iter().zip(&nu.counts).flat_map(|(v, c)| std::iter::repeat_n(v.clone(), *c as usize)).collect())
}

/// The replication map sending a variable on `(n, nu)` to one on the uniform
/// space of `m = nu.denominator` atoms.
pub fn replicate(f: &RandomVariable, nu: &RationalMeasure) -> Result<RandomVariable> {
    let values = replicate_values(f.values(), nu)?;
    Ok(if f.is_real() {
        RandomVariable::real(values.iter().map(|v| v.re).collect())
    } else {
        RandomVariable::complex(values)
    })
}

pub const MAX_SIGN_VECTOR_LENGTH: usize = 25;

/// All `2^n` vectors in `{+1, -1}^n`; vector `k` has `-1` wherever bit `j` of `k`
/// is set, so the first vector is all ones.
pub fn extreme_sign_vectors(n: usize) -> Result<impl Iterator<Item = Vec<f64>>> {
    if n > MAX_SIGN_VECTOR_LENGTH {
        return Err(Error::TooLarge { size: n, limit: MAX_SIGN_VECTOR_LENGTH });
    }
    Ok((0u64..1 << n).map(move |k| sign_vector(n, k)))
}

pub(crate) fn sign_vector(n: usize, k: u64) -> Vec<f64> {
    (0..n).map(|j| if k >> j & 1 == 1 { -1.0 } else { 1.0 }).collect()
}

pub const MAX_EXTREME_ATOMS: usize = 20;

/// A centered function with values in `{-1, +1, c}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremePoint {
    pub values: Vec<Rational>,
    /// The middle value, or `None` when no atom takes it.
    pub c: Option<Rational>,
    /// At most one positive-weight atom takes the value `c`; only these are
    /// vertices of the polytope `{||f|| <= 1, E f = 0}` for a discrete measure.
    pub vertex: bool,
}

impl ExtremePoint {
    /// `(||1 - f||_1, ||1 + f||_1, ||c - f||_1)` under `mu`.
    pub fn l1_distances(&self, mu: &ExactMeasure) -> Result<(Rational, Rational, Rational)> {
        let c = self.c.clone().unwrap_or_else(Rational::zero);
        let one = Rational::one();
        let dist = |center: &Rational| -> Result<Rational> {
            let shifted: Vec<Rational> = self.values.iter().map(|v| center - v).collect();
            let n = exact::p_norm(&shifted, mu, Exponent::ONE)?;
            Ok(n.as_rational().expect("p = 1 is rational").clone())
        };
        Ok((dist(&one)?, dist(&-one.clone())?, dist(&c)?))
    }
}

#[derive(Clone, Copy)]
enum Class {
    Plus,
    Minus,
    Middle,
}

fn assignment(n: usize, mut k: u64) -> Vec<Class> {
    (0..n)
        .map(|_| {
            let class = match k % 3 {
                0 => Class::Plus,
                1 => Class::Minus,
                _ => Class::Middle,
            };
            k /= 3;
            class
        })
        .collect()
}

fn extreme_point(mu: &ExactMeasure, classes: &[Class]) -> Option<ExtremePoint> {
    let mut plus = Rational::zero();
    let mut minus = Rational::zero();
    let mut middle = Rational::zero();
    let mut middle_count = 0usize;
    let mut positive_middle = 0usize;
    for (class, w) in classes.iter().zip(mu.weights()) {
        match class {
            Class::Plus => plus += w,
            Class::Minus => minus += w,
            Class::Middle => {
                middle += w;
                middle_count += 1;
                if w.is_positive() {
                    positive_middle += 1;
                }
            }
        }
    }
    let c = if middle_count == 0 {
        if plus != minus {
            return None;
        }
        None
    } else if middle.is_zero() {
        // null atoms carry no constraint; fix their value at 0
        if plus != minus {
            return None;
        }
        Some(Rational::zero())
    } else {
        let c = (&minus - &plus) / &middle;
        if c.abs() >= Rational::one() {
            return None;
        }
        Some(c)
    };
    let values = classes
        .iter()
        .map(|class| match class {
            Class::Plus => Rational::one(),
            Class::Minus => -Rational::one(),
            Class::Middle => c.clone().expect("middle class has a value"),
        })
        .collect();
    Some(ExtremePoint { values, c, vertex: positive_middle <= 1 })
}

/// All assignments of the atoms to the classes `{+1, -1, c}` whose induced
/// middle value keeps the function centered with `-1 < c < 1`.
pub fn extreme_mean_zero_points(mu: &ExactMeasure) -> Result<impl Iterator<Item = ExtremePoint> + '_> {
    let n = mu.len();
    if n > MAX_EXTREME_ATOMS {
        return Err(Error::TooLarge { size: n, limit: MAX_EXTREME_ATOMS });
    }
    let total = 3u64.pow(n as u32);
    Ok((0..total).filter_map(move |k| extreme_point(mu, &assignment(n, k))))
}

/// Float-mode expectation preserved by replication; exposed for the suites.
pub fn replication_gaps(f: &RandomVariable, nu: &RationalMeasure, p: Exponent) -> Result<[f64; 3]> {
    let mu = nu.to_measure();
    let phi = replicate(f, nu)?;
    let lambda = DiscreteMeasure::uniform(nu.denominator as usize)?;
    Ok([
        (expectation(f, &mu)? - expectation(&phi, &lambda)?).norm(),
        (sup_norm(f) - sup_norm(&phi)).abs(),
        (centered_moment(f, &mu, p)? - centered_moment(&phi, &lambda, p)?).abs(),
    ])
}

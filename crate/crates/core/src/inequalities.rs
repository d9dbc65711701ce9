//! Defect functionals `lhs - rhs` for the scalar Leibniz-type inequalities.
//! A nonpositive defect means the inequality holds on that instance.

use crate::error::{Error, Result};
use crate::measure::{
    centered_moment, check_len, expectation, p_norm, sup_norm, DiscreteMeasure, Exponent, RandomVariable,
};
use crate::report::{DefectReport, Instance};

fn base_instance(mu: &DiscreteMeasure) -> Instance {
    Instance::new().with_weights(mu.weights())
}

fn leibniz_sides(f: &RandomVariable, g: &RandomVariable, mu: &DiscreteMeasure, p: Exponent) -> Result<(f64, f64)> {
    check_len(f.len(), g.len())?;
    let fg = f.product(g)?;
    let lhs = centered_moment(&fg, mu, p)?;
    let rhs = sup_norm(f) * centered_moment(g, mu, p)? + sup_norm(g) * centered_moment(f, mu, p)?;
    Ok((lhs, rhs))
}

/// `sigma_p(fg) <= ||f|| sigma_p(g) + ||g|| sigma_p(f)`.
pub fn leibniz_defect(
    f: &RandomVariable,
    g: &RandomVariable,
    mu: &DiscreteMeasure,
    p: Exponent,
) -> Result<DefectReport> {
    let (lhs, rhs) = leibniz_sides(f, g, mu, p)?;
    Ok(DefectReport::new(lhs, rhs, base_instance(mu).with_variable("f", f).with_variable("g", g)))
}

/// `sigma_p(1/f) <= ||1/f||² sigma_p(f)`.
pub fn strong_leibniz_defect(f: &RandomVariable, mu: &DiscreteMeasure, p: Exponent) -> Result<DefectReport> {
    let inv = f.reciprocal()?;
    let lhs = centered_moment(&inv, mu, p)?;
    let s = sup_norm(&inv);
    let rhs = s * s * centered_moment(f, mu, p)?;
    Ok(DefectReport::new(lhs, rhs, base_instance(mu).with_variable("f", f)))
}

/// The vector `f E x - E(fx)·1`.
pub fn auxiliary_vector(f: &RandomVariable, x: &RandomVariable, mu: &DiscreteMeasure) -> Result<RandomVariable> {
    let ex = expectation(x, mu)?;
    let efx = expectation(&f.product(x)?, mu)?;
    Ok(f.scale(ex).shift(efx))
}

/// `||f E x - E(fx)||_p <= ||x|| sigma_p(f)` for real `f`.
pub fn auxiliary_defect(
    f: &RandomVariable,
    x: &RandomVariable,
    mu: &DiscreteMeasure,
    p: Exponent,
) -> Result<DefectReport> {
    if !f.is_real() {
        return Err(Error::ComplexNotAllowed);
    }
    check_len(mu.len(), x.len())?;
    let v = auxiliary_vector(f, x, mu)?;
    let lhs = p_norm(&v, mu, p)?;
    let rhs = sup_norm(x) * centered_moment(f, mu, p)?;
    Ok(DefectReport::new(lhs, rhs, base_instance(mu).with_variable("f", f).with_variable("x", x)))
}

fn check_op_norm(op_norm: f64) -> Result<()> {
    if !(op_norm >= 1.0) {
        return Err(Error::OperatorNormBelowOne(op_norm));
    }
    Ok(())
}

/// `2/(||I-P||_p + 1) sigma_p(fg) <= ||g|| sigma_p(f) + ||f|| sigma_p(g)`,
/// with `op_norm = ||I-P||_p` supplied by the caller.
pub fn rough_leibniz_defect(
    f: &RandomVariable,
    g: &RandomVariable,
    mu: &DiscreteMeasure,
    p: Exponent,
    op_norm: f64,
) -> Result<DefectReport> {
    check_op_norm(op_norm)?;
    let (lhs, rhs) = leibniz_sides(f, g, mu, p)?;
    Ok(DefectReport::new(
        2.0 / (op_norm + 1.0) * lhs,
        rhs,
        base_instance(mu).with_variable("f", f).with_variable("g", g),
    ))
}

/// The two inverse estimates obtained by renorming `L^p`:
///
/// * `sigma_p(1/f) <= (1 + ||I-P||)² ||1/f||² sigma_p(f)`
/// * `|E f| sigma_p(1/f) <= ||I-P|| ||1/f|| sigma_p(f)`
pub fn renorm_inverse_defects(
    f: &RandomVariable,
    mu: &DiscreteMeasure,
    p: Exponent,
    op_norm: f64,
) -> Result<(DefectReport, DefectReport)> {
    check_op_norm(op_norm)?;
    let inv = f.reciprocal()?;
    let sigma_inv = centered_moment(&inv, mu, p)?;
    let sigma_f = centered_moment(f, mu, p)?;
    let s = sup_norm(&inv);
    let mean = expectation(f, mu)?.norm();
    let inputs = base_instance(mu).with_variable("f", f);
    let first = DefectReport::new(sigma_inv, (1.0 + op_norm).powi(2) * s * s * sigma_f, inputs.clone());
    let second = DefectReport::new(mean * sigma_inv, op_norm * s * sigma_f, inputs);
    Ok((first, second))
}

fn nonnegative_real(f: &RandomVariable) -> Result<Vec<f64>> {
    let values = f.real_values()?;
    if let Some(index) = values.iter().position(|v| *v < 0.0) {
        return Err(Error::NegativeValue { index });
    }
    Ok(values)
}

/// `sigma_p(f²) <= 2||f|| sigma_p(f)` for nonnegative real `f`.
pub fn square_corollary_defect(f: &RandomVariable, mu: &DiscreteMeasure, p: Exponent) -> Result<DefectReport> {
    nonnegative_real(f)?;
    let lhs = centered_moment(&f.square(), mu, p)?;
    let rhs = 2.0 * sup_norm(f) * centered_moment(f, mu, p)?;
    Ok(DefectReport::new(lhs, rhs, base_instance(mu).with_variable("f", f)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Up,
    Down,
}

fn directions(v: &[f64]) -> (bool, bool) {
    let up = v.windows(2).all(|w| w[0] <= w[1]);
    let down = v.windows(2).all(|w| w[0] >= w[1]);
    (up, down)
}

fn common_direction(f: &[f64], g: &[f64]) -> Option<Direction> {
    let (fu, fd) = directions(f);
    let (gu, gd) = directions(g);
    if fu && gu {
        Some(Direction::Up)
    } else if fd && gd {
        Some(Direction::Down)
    } else {
        None
    }
}

/// Leibniz defect for nonnegative step functions that are monotone in the
/// same direction along the grid order.
pub fn monotone_corollary_defect(
    f: &RandomVariable,
    g: &RandomVariable,
    mu: &DiscreteMeasure,
    p: Exponent,
) -> Result<DefectReport> {
    let fv = nonnegative_real(f)?;
    let gv = nonnegative_real(g)?;
    check_len(fv.len(), gv.len())?;
    if common_direction(&fv, &gv).is_none() {
        return Err(Error::NotMonotone);
    }
    leibniz_defect(f, g, mu, p)
}

/// Convenience for callers holding real slices.
pub fn real(values: &[f64]) -> RandomVariable {
    RandomVariable::real(values.to_vec())
}

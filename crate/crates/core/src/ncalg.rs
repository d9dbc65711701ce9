//! Matrix algebras `M_d` with faithful states `omega(a) = trace(rho a)`.
//!
//! The GNS space is `M_d` with `<a, b> = omega(b* a)`. In row-major
//! coordinates `vec(a)[k d + i] = a[k][i]` this inner product has Gram matrix
//! `I ⊗ rhoᵀ`; with its Cholesky factor `G = L L*` the map `vec(a) -> L* vec(a)`
//! is an isometry onto `C^(d²)` with the standard inner product, so operator
//! norms on the GNS space are largest singular values of `L* M L*⁻¹`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{Data, DefectReport, Instance};

pub type Matrix = DMatrix<Complex64>;

/// Largest accepted condition number for sampled faithful states.
pub const FAITHFUL_CONDITION_LIMIT: f64 = 1e6;
/// Smallest singular value below which an element counts as singular.
pub const INVERTIBILITY_FLOOR: f64 = 1e-8;
const STATE_TOLERANCE: f64 = 1e-12;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn max_abs_entry(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// A faithful state on `M_d` given by a positive-definite density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    rho: Matrix,
    spectrum: Vec<f64>,
    tracial: bool,
}

impl DensityState {
    pub fn new(rho: Matrix) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(Error::InvalidArgument("density matrix must be square and nonempty".into()));
        }
        let d = rho.nrows();
        let skew = max_abs_entry(&(&rho - rho.adjoint()));
        if skew > STATE_TOLERANCE {
            return Err(Error::InvalidArgument(format!("density matrix not Hermitian (skew {skew})")));
        }
        let trace = rho.trace();
        if (trace - c(1.0)).norm() > STATE_TOLERANCE {
            return Err(Error::InvalidArgument(format!("density matrix has trace {trace}")));
        }
        let mut spectrum: Vec<f64> = rho.clone().symmetric_eigenvalues().iter().copied().collect();
        spectrum.sort_by(|a, b| a.total_cmp(b));
        if !(spectrum[0] > 0.0) {
            return Err(Error::NotFaithful(spectrum[0]));
        }
        let tracial = max_abs_entry(&(&rho - Matrix::identity(d, d) * c(1.0 / d as f64))) <= STATE_TOLERANCE;
        Ok(Self { rho, spectrum, tracial })
    }

    /// The normalized trace.
    pub fn tracial(d: usize) -> Self {
        Self::new(Matrix::identity(d, d) * c(1.0 / d as f64)).expect("normalized trace is a state")
    }

    /// Diagonal state with the given positive spectrum, normalized to trace one.
    pub fn from_spectrum(spectrum: &[f64]) -> Result<Self> {
        if spectrum.is_empty() || spectrum.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument("spectrum must be positive".into()));
        }
        let total: f64 = spectrum.iter().sum();
        let diag = DVector::from_iterator(spectrum.len(), spectrum.iter().map(|s| c(s / total)));
        let mut rho = Matrix::from_diagonal(&diag);
        // force the trace to one exactly in the first entry
        let drift = c(1.0) - rho.trace();
        rho[(0, 0)] += drift;
        Self::new(rho)
    }

    /// `G G* / trace(G G*)` for random `G`, rejecting condition numbers above
    /// [`FAITHFUL_CONDITION_LIMIT`]. Non-tracial whenever `d > 1`.
    pub fn random_faithful<R: Rng>(d: usize, rng: &mut R) -> Self {
        if d == 1 {
            return Self::tracial(1);
        }
        loop {
            let g = random_element(d, rng);
            let mut rho = &g * g.adjoint();
            rho = (&rho + rho.adjoint()) * c(0.5);
            let t = rho.trace().re;
            rho /= c(t);
            let drift = c(1.0) - rho.trace();
            rho[(0, 0)] += c(drift.re);
            if let Ok(state) = Self::new(rho) {
                let s = &state.spectrum;
                if s[s.len() - 1] / s[0] <= FAITHFUL_CONDITION_LIMIT && !state.tracial {
                    return state;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn rho(&self) -> &Matrix {
        &self.rho
    }

    /// Eigenvalues of `rho` in ascending order.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    pub fn is_tracial(&self) -> bool {
        self.tracial
    }

    fn check(&self, a: &Matrix) -> Result<()> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: a.nrows() });
        }
        Ok(())
    }

    fn omega(&self, a: &Matrix) -> Complex64 {
        // trace(rho a) without forming the product
        let d = self.dim();
        (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| self.rho[(i, j)] * a[(j, i)]).sum()
    }
}

/// Uniform entries in `[-1, 1] + i[-1, 1]`.
pub fn random_element<R: Rng>(d: usize, rng: &mut R) -> Matrix {
    Matrix::from_fn(d, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Unitary `Q` factor of a random matrix.
pub fn random_unitary<R: Rng>(d: usize, rng: &mut R) -> Matrix {
    random_element(d, rng).qr().q()
}

/// An element of `M_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement(Matrix);

impl AlgebraElement {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidArgument("algebra elements are square matrices".into()));
        }
        Ok(Self(m))
    }

    pub fn identity(d: usize) -> Self {
        Self(Matrix::identity(d, d))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self(Matrix::from_diagonal(&DVector::from_iterator(values.len(), values.iter().map(|v| c(*v)))))
    }

    pub fn random<R: Rng>(d: usize, rng: &mut R) -> Self {
        Self(random_element(d, rng))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self(&self.0 * &other.0)
    }

    pub fn scale(&self, z: Complex64) -> Self {
        Self(&self.0 * z)
    }

    /// `a - z·1`.
    pub fn shift(&self, z: Complex64) -> Self {
        let d = self.dim();
        Self(&self.0 - Matrix::identity(d, d) * z)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        self.0.clone().singular_values().iter().copied().collect()
    }

    /// Operator (largest singular value) norm.
    pub fn norm(&self) -> f64 {
        self.singular_values().into_iter().fold(0.0, f64::max)
    }

    pub fn smallest_singular_value(&self) -> f64 {
        self.singular_values().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn inverse(&self) -> Result<Self> {
        let s = self.smallest_singular_value();
        if !(s > INVERTIBILITY_FLOOR) {
            return Err(Error::Singular(s));
        }
        self.0.clone().try_inverse().map(Self).ok_or(Error::Singular(s))
    }
}

/// The GNS Hilbert space of a faithful state, realized on `C^(d²)`.
#[derive(Debug, Clone)]
pub struct GnsGeometry {
    d: usize,
    /// Upper factor `R = L*` with `Gram = R* R`.
    factor: Matrix,
    factor_inv: Matrix,
}

impl GnsGeometry {
    pub fn new(state: &DensityState) -> Result<Self> {
        let d = state.dim();
        let n = d * d;
        let mut gram = Matrix::zeros(n, n);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    gram[(k * d + j, k * d + i)] = state.rho[(i, j)];
                }
            }
        }
        let chol = gram.cholesky().ok_or(Error::NotFaithful(state.spectrum[0]))?;
        let factor = chol.l().adjoint();
        let factor_inv = factor.clone().try_inverse().ok_or(Error::NotFaithful(state.spectrum[0]))?;
        Ok(Self { d, factor, factor_inv })
    }

    pub fn vectorize(&self, a: &Matrix) -> DVector<Complex64> {
        DVector::from_iterator(self.d * self.d, (0..self.d).flat_map(|k| (0..self.d).map(move |i| a[(k, i)])))
    }

    /// Coordinates in which the GNS inner product is the standard one.
    pub fn coordinates(&self, a: &Matrix) -> DVector<Complex64> {
        &self.factor * self.vectorize(a)
    }

    /// `<a, b> = omega(b* a)`.
    pub fn inner(&self, a: &Matrix, b: &Matrix) -> Complex64 {
        self.coordinates(b).dotc(&self.coordinates(a))
    }

    /// Norm of a linear map on `M_d` given by its matrix on `vec` coordinates.
    pub fn operator_norm(&self, m: &Matrix) -> f64 {
        let t = &self.factor * m * &self.factor_inv;
        t.singular_values().iter().fold(0.0, |a, s| a.max(*s))
    }

    /// Matrix of left multiplication `b -> a b`.
    pub fn left_multiplication(&self, a: &Matrix) -> Matrix {
        let d = self.d;
        let mut m = Matrix::zeros(d * d, d * d);
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    m[(k * d + i, j * d + i)] = a[(k, j)];
                }
            }
        }
        m
    }

    /// Matrix of `E: b -> omega(b)·1`.
    pub fn expectation_projection(&self, state: &DensityState) -> Matrix {
        let d = self.d;
        let mut m = Matrix::zeros(d * d, d * d);
        for k in 0..d {
            for j in 0..d {
                for i in 0..d {
                    // omega(b) = sum_ij rho_ij b_ji
                    m[(k * d + k, j * d + i)] = state.rho[(i, j)];
                }
            }
        }
        m
    }
}

fn check_dim(a: &AlgebraElement, w: &DensityState) -> Result<()> {
    w.check(&a.0)
}

pub fn state_apply(a: &AlgebraElement, w: &DensityState) -> Result<Complex64> {
    check_dim(a, w)?;
    Ok(w.omega(&a.0))
}

/// `||a||_2 = omega(a* a)^(1/2)`.
pub fn l2_norm(a: &AlgebraElement, w: &DensityState) -> Result<f64> {
    check_dim(a, w)?;
    Ok(w.omega(&(a.0.adjoint() * &a.0)).re.max(0.0).sqrt())
}

/// `omega(|a - omega(a)|²)^(1/2)`.
pub fn nc_sigma2(a: &AlgebraElement, w: &DensityState) -> Result<f64> {
    let mean = state_apply(a, w)?;
    l2_norm(&a.shift(mean), w)
}

/// `max(sigma(a), sigma(a*))`.
pub fn nc_sigma2_max(a: &AlgebraElement, w: &DensityState) -> Result<f64> {
    Ok(nc_sigma2(a, w)?.max(nc_sigma2(&a.adjoint(), w)?))
}

/// `||[E, L_a]||` on the GNS space.
pub fn commutator_dirac_norm(a: &AlgebraElement, w: &DensityState) -> Result<f64> {
    check_dim(a, w)?;
    let geometry = GnsGeometry::new(w)?;
    let e = geometry.expectation_projection(w);
    let l = geometry.left_multiplication(&a.0);
    let commutator = &e * &l - &l * &e;
    Ok(geometry.operator_norm(&commutator))
}

fn matrix_instance(w: &DensityState) -> Instance {
    Instance::new().with("rho", Data::Matrix(w.rho.clone()))
}

/// `||omega(x) a - omega(xa)||_2 <= ||x|| ||a - omega(a)||_2`.
pub fn lemma_defect(a: &AlgebraElement, x: &AlgebraElement, w: &DensityState) -> Result<DefectReport> {
    check_dim(a, w)?;
    check_dim(x, w)?;
    let v = a.scale(w.omega(&x.0)).shift(w.omega(&(&x.0 * &a.0)));
    let lhs = l2_norm(&v, w)?;
    let rhs = x.norm() * nc_sigma2(a, w)?;
    Ok(DefectReport::new(
        lhs,
        rhs,
        matrix_instance(w).with("a", Data::Matrix(a.0.clone())).with("x", Data::Matrix(x.0.clone())),
    ))
}

/// `||xa||_2 <= ||x|| ||a||_2`.
pub fn module_bound_defect(x: &AlgebraElement, a: &AlgebraElement, w: &DensityState) -> Result<DefectReport> {
    check_dim(a, w)?;
    check_dim(x, w)?;
    let lhs = l2_norm(&x.mul(a), w)?;
    let rhs = x.norm() * l2_norm(a, w)?;
    Ok(DefectReport::new(
        lhs,
        rhs,
        matrix_instance(w).with("x", Data::Matrix(x.0.clone())).with("a", Data::Matrix(a.0.clone())),
    ))
}

/// `||a⁻¹ - omega(a⁻¹)||_2 <= ||a⁻¹||² ||a - omega(a)||_2`.
pub fn inverse_inequality_defect(a: &AlgebraElement, w: &DensityState) -> Result<DefectReport> {
    check_dim(a, w)?;
    let inv = a.inverse()?;
    let lhs = nc_sigma2(&inv, w)?;
    let s = inv.norm();
    let rhs = s * s * nc_sigma2(a, w)?;
    Ok(DefectReport::new(lhs, rhs, matrix_instance(w).with("a", Data::Matrix(a.0.clone()))))
}

/// `sigma(ab) <= ||a|| sigma(b) + ||b|| sigma(a)`; the state's tracial flag is
/// recorded in the inputs.
pub fn product_leibniz_nc_defect(a: &AlgebraElement, b: &AlgebraElement, w: &DensityState) -> Result<DefectReport> {
    check_dim(a, w)?;
    check_dim(b, w)?;
    let lhs = nc_sigma2(&a.mul(b), w)?;
    let rhs = a.norm() * nc_sigma2(b, w)? + b.norm() * nc_sigma2(a, w)?;
    Ok(DefectReport::new(
        lhs,
        rhs,
        matrix_instance(w)
            .with("a", Data::Matrix(a.0.clone()))
            .with("b", Data::Matrix(b.0.clone()))
            .with("tracial", Data::Flag(w.tracial)),
    ))
}

/// Norms of the derivation `[E, T_a]` on `A ⊕ L²(A, omega)` with
/// `||(x, y)|| = max(||x||, ||y||_2)`, `E(x, y) = (0, omega(x)1)` and
/// `T_a(x, y) = (xa, ya)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivationCheck {
    /// Largest `||omega(x) a - omega(xa)||_2` over the sampled unit-norm `x`.
    pub sampled_sup: f64,
    /// `||a - omega(a)||_2`.
    pub closed_form: f64,
    /// The value at `x = 1`.
    pub unit_sample: f64,
    /// `||a||`.
    pub element_norm: f64,
    /// `||T_a (x, 0)||` at `x = u u*` for a top left singular vector `u` of `a`.
    pub t_norm_witness: f64,
    /// Largest `||T_a (x, y)||` over sampled unit vectors.
    pub t_norm_sample_max: f64,
    /// Largest Frobenius deviation between `T_ab` and `T_b ∘ T_a` on samples.
    pub composition_error: f64,
}

impl DerivationCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.sampled_sup <= self.closed_form + tol
            && (self.sampled_sup - self.closed_form).abs() <= tol
            && (self.unit_sample - self.closed_form).abs() <= tol
            && (self.t_norm_witness - self.element_norm).abs() <= tol
            && self.t_norm_sample_max <= self.element_norm + tol
            && self.composition_error <= tol
    }
}

/// Samples the derivation construction for a tracial state.
pub fn derivation_construct_norm(
    a: &AlgebraElement,
    w: &DensityState,
    samples: usize,
    seed: u64,
) -> Result<DerivationCheck> {
    check_dim(a, w)?;
    if !w.is_tracial() {
        return Err(Error::NotTracial);
    }
    let d = w.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let closed_form = nc_sigma2(a, w)?;
    let delta = |x: &AlgebraElement| -> Result<f64> {
        let v = a.scale(w.omega(&x.0)).shift(w.omega(&(&x.0 * &a.0)));
        l2_norm(&v, w)
    };
    let unit_sample = delta(&AlgebraElement::identity(d))?;
    let mut sampled_sup = unit_sample;
    let element_norm = a.norm();
    let mut t_norm_sample_max: f64 = 0.0;
    let mut composition_error: f64 = 0.0;
    for k in 0..samples {
        let x = if k % 2 == 0 {
            let r = AlgebraElement::random(d, &mut rng);
            let n = r.norm();
            r.scale(c(1.0 / n))
        } else {
            AlgebraElement(random_unitary(d, &mut rng))
        };
        sampled_sup = sampled_sup.max(delta(&x)?);
        let y = AlgebraElement::random(d, &mut rng);
        let y = y.scale(c(1.0 / l2_norm(&y, w)?));
        let t = x.mul(a).norm().max(l2_norm(&y.mul(a), w)?);
        t_norm_sample_max = t_norm_sample_max.max(t);
        let b = AlgebraElement::random(d, &mut rng);
        let ab = a.mul(&b);
        let err_x = (&x.mul(&ab).0 - &x.mul(a).mul(&b).0).norm();
        let err_y = (&y.mul(&ab).0 - &y.mul(a).mul(&b).0).norm();
        composition_error = composition_error.max(err_x).max(err_y);
    }
    let svd = a.0.clone().svd(true, false);
    let top = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if *s > acc.1 { (i, *s) } else { acc })
        .0;
    let u = svd.u.expect("requested U").column(top).into_owned();
    let witness = AlgebraElement(&u * u.adjoint());
    let t_norm_witness = witness.mul(a).norm();
    Ok(DerivationCheck {
        sampled_sup,
        closed_form,
        unit_sample,
        element_norm,
        t_norm_witness,
        t_norm_sample_max,
        composition_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn half() -> DensityState {
        DensityState::tracial(2)
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(11)
    }

    #[test]
    fn state_validation() {
        assert!(half().is_tracial());
        let s = DensityState::from_spectrum(&[1.0, 3.0]).unwrap();
        assert!(!s.is_tracial());
        assert_abs_diff_eq!(s.spectrum()[1], 0.75, epsilon = 1e-15);
        assert!(DensityState::from_spectrum(&[1.0, 0.0]).is_err());
        let not_faithful = Matrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(0.0)]));
        assert!(matches!(DensityState::new(not_faithful), Err(Error::NotFaithful(_))));
        let bad_trace = Matrix::identity(2, 2);
        assert!(DensityState::new(bad_trace).is_err());
        let mut r = rng();
        let w = DensityState::random_faithful(3, &mut r);
        assert!(w.spectrum()[0] > 0.0);
        assert!(w.spectrum()[2] / w.spectrum()[0] <= FAITHFUL_CONDITION_LIMIT);
    }

    #[test]
    fn state_apply_examples() {
        let w = half();
        assert_abs_diff_eq!(state_apply(&AlgebraElement::identity(2), &w).unwrap().re, 1.0);
        assert_eq!(state_apply(&AlgebraElement::diagonal(&[1.0, -1.0]), &w).unwrap(), c(0.0));
        let mut r = rng();
        let w = DensityState::random_faithful(3, &mut r);
        let a = AlgebraElement::random(3, &mut r);
        let lhs = state_apply(&a.adjoint(), &w).unwrap();
        let rhs = state_apply(&a, &w).unwrap().conj();
        assert!((lhs - rhs).norm() < 1e-14);
        let wrong = AlgebraElement::identity(3);
        assert!(matches!(state_apply(&wrong, &half()), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn norm_examples() {
        let w = half();
        assert_abs_diff_eq!(l2_norm(&AlgebraElement::identity(2), &w).unwrap(), 1.0);
        assert_eq!(l2_norm(&AlgebraElement(Matrix::zeros(2, 2)), &w).unwrap(), 0.0);
        let a = AlgebraElement::diagonal(&[2.0, 1.0]);
        assert_abs_diff_eq!(l2_norm(&a, &w).unwrap(), 2.5f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(nc_sigma2(&a, &w).unwrap(), 0.5, epsilon = 1e-15);
        let scalar = AlgebraElement::identity(2).scale(Complex64::new(3.0, -1.0));
        assert_abs_diff_eq!(nc_sigma2(&scalar, &w).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn tracial_normal_elements_have_equal_deviations() {
        let mut r = rng();
        let w = DensityState::tracial(3);
        let u = random_unitary(3, &mut r);
        let diag = Matrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-0.5, 0.1),
            Complex64::new(0.3, -0.7),
        ]));
        let normal = AlgebraElement(&u * diag * u.adjoint());
        assert_abs_diff_eq!(
            nc_sigma2(&normal, &w).unwrap(),
            nc_sigma2(&normal.adjoint(), &w).unwrap(),
            epsilon = 1e-13
        );
    }

    #[test]
    fn gns_inner_product_matches_trace_formula() {
        let mut r = rng();
        for d in 1..=4 {
            let w = DensityState::random_faithful(d, &mut r);
            let g = GnsGeometry::new(&w).unwrap();
            let a = random_element(d, &mut r);
            let b = random_element(d, &mut r);
            let direct = (b.adjoint() * &a * w.rho()).trace();
            assert!((g.inner(&a, &b) - direct).norm() < 1e-12);
            let one = Matrix::identity(d, d);
            assert!((g.inner(&one, &one) - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn commutator_examples() {
        let w = half();
        assert!(commutator_dirac_norm(&AlgebraElement::identity(2), &w).unwrap() < 1e-12);
        let z = AlgebraElement::diagonal(&[1.0, -1.0]);
        assert_abs_diff_eq!(commutator_dirac_norm(&z, &w).unwrap(), 1.0, epsilon = 1e-12);
        let mut r = rng();
        for d in 2..=4 {
            let w = DensityState::random_faithful(d, &mut r);
            let a = AlgebraElement::random(d, &mut r);
            let lhs = commutator_dirac_norm(&a, &w).unwrap();
            let rhs = nc_sigma2_max(&a, &w).unwrap();
            assert!((lhs - rhs).abs() < 1e-8, "d={d}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn lemma_and_module_examples() {
        let mut r = rng();
        let w = DensityState::random_faithful(3, &mut r);
        let a = AlgebraElement::random(3, &mut r);
        let id = AlgebraElement::identity(3);
        let tight = lemma_defect(&a, &id, &w).unwrap();
        assert_abs_diff_eq!(tight.defect, 0.0, epsilon = 1e-12);
        assert!(lemma_defect(&id, &a, &w).unwrap().lhs < 1e-12);
        let u = AlgebraElement(random_unitary(3, &mut r));
        let m = module_bound_defect(&u, &a, &w).unwrap();
        assert!(m.holds());
        assert_abs_diff_eq!(module_bound_defect(&id, &a, &w).unwrap().defect, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn inverse_examples() {
        let w = half();
        let s = AlgebraElement::identity(2).scale(c(-2.0));
        assert!(inverse_inequality_defect(&s, &w).unwrap().defect.abs() < 1e-15);
        let a = AlgebraElement::diagonal(&[2.0, 1.0]);
        let r = inverse_inequality_defect(&a, &w).unwrap();
        assert_abs_diff_eq!(r.lhs, 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(r.rhs, 0.5, epsilon = 1e-15);
        let singular = AlgebraElement::diagonal(&[1.0, 0.0]);
        assert!(matches!(inverse_inequality_defect(&singular, &w), Err(Error::Singular(_))));
    }

    #[test]
    fn product_examples() {
        let mut r = rng();
        let w = DensityState::random_faithful(3, &mut r);
        let a = AlgebraElement::random(3, &mut r);
        let rep = product_leibniz_nc_defect(&a, &AlgebraElement::identity(3), &w).unwrap();
        assert!(rep.defect <= 1e-12);
        assert_eq!(rep.inputs.get("tracial"), Some(&Data::Flag(false)));
    }

    #[test]
    fn derivation_examples() {
        let w = half();
        let id = derivation_construct_norm(&AlgebraElement::identity(2), &w, 20, 1).unwrap();
        assert!(id.sampled_sup < 1e-12 && id.closed_form < 1e-12);
        let z = derivation_construct_norm(&AlgebraElement::diagonal(&[1.0, -1.0]), &w, 20, 1).unwrap();
        assert_abs_diff_eq!(z.sampled_sup, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(z.closed_form, 1.0, epsilon = 1e-12);
        assert!(z.holds(1e-9));
        let mut r = rng();
        let nontracial = DensityState::random_faithful(2, &mut r);
        assert_eq!(derivation_construct_norm(&AlgebraElement::identity(2), &nontracial, 5, 1), Err(Error::NotTracial));
    }
}

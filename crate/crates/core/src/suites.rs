//! Monte-Carlo and enumeration suites over the proved inequalities.
//!
//! Every check draws its instances in chunks of [`CHUNK`] trials; chunk `k`
//! of a check uses ChaCha8 stream `k` of a seed derived from the suite seed
//! and the check name, so reports do not depend on thread scheduling.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::Signed;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, rational, ExactDefect, ExactMeasure, Rational};
use crate::inequalities::{
    auxiliary_defect, leibniz_defect, monotone_corollary_defect, real, renorm_inverse_defects, rough_leibniz_defect,
    square_corollary_defect, strong_leibniz_defect,
};
use crate::measure::{DiscreteMeasure, Exponent, RandomVariable};
use crate::ncalg::{
    commutator_dirac_norm, derivation_construct_norm, inverse_inequality_defect, lemma_defect, module_bound_defect,
    nc_sigma2_max, product_leibniz_nc_defect, AlgebraElement, DensityState,
};
use crate::projections::{
    franchetti_norm, interpolation_bound, numeric_operator_p_norm, projection_table, uniform_exact_norm, ProjectionRow,
    DEFAULT_FRANCHETTI_GRID,
};
use crate::report::{Data, DefectReport, Instance, DEFAULT_TOLERANCE};
use crate::sampling::{
    aligned_pair, complex_box, invertible_real, mix_seed, monotone_pair, nonnegative_box, rational_measure, real_box,
    simplex_measure, stream_rng,
};
use crate::structure::{
    extreme_mean_zero_points, rationalize, reduction_check, replicate, replicate_values, replication_gaps,
    schur_leibniz_verify, sign_vector,
};

/// Trials per parallel work unit.
pub const CHUNK: usize = 1024;
/// Agreement required between numeric and exact projection norms.
pub const PROJECTION_TOLERANCE: f64 = 1e-6;
/// Agreement required of the Franchetti maximizer.
pub const FRANCHETTI_TOLERANCE: f64 = 1e-9;
/// Agreement required between the commutator norm and `max(sigma(a), sigma(a*))`.
pub const COMMUTATOR_TOLERANCE: f64 = 1e-8;
/// Agreement required of replicated moments computed in floating point.
pub const REPLICATION_TOLERANCE: f64 = 1e-12;
/// Lower bound on `|f_i|` for strong-Leibniz trials.
pub const INVERTIBILITY_FLOOR: f64 = 0.05;

const SCALAR_PS: [f64; 4] = [1.0, 1.5, 2.0, 3.0];
const FRANCHETTI_GRID: [f64; 7] = [1.1, 1.25, 1.5, 2.0, 3.0, 4.0, 8.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Scalar,
    Projections,
    Majorization,
    Reduction,
    Nc,
}

impl Suite {
    pub const ALL: [Suite; 5] = [Suite::Scalar, Suite::Projections, Suite::Majorization, Suite::Reduction, Suite::Nc];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Scalar => "scalar",
            Suite::Projections => "projections",
            Suite::Majorization => "majorization",
            Suite::Reduction => "reduction",
            Suite::Nc => "nc",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    /// Random instances per check.
    pub trials: usize,
    pub seed: u64,
    /// Threshold for defect checks; agreement checks carry their own.
    pub tolerance: f64,
    /// Adds exact rational checks where supported.
    pub exact: bool,
    /// Objective evaluations for numeric operator norms.
    pub budget: usize,
    /// Samples per instance of the derivation construction.
    pub samples: usize,
    /// Keep per-instance records of the matrix suite.
    pub record_instances: bool,
}

impl SuiteConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            tolerance: DEFAULT_TOLERANCE,
            exact: false,
            budget: 20_000,
            samples: 16,
            record_instances: false,
        }
    }
}

/// Aggregate of one check over its instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    /// False for exploratory measurements that cannot fail the suite.
    pub asserted: bool,
    pub instances: usize,
    /// Instances outside the check's domain (e.g. numerically singular).
    pub skipped: usize,
    pub tolerance: f64,
    pub max_defect: f64,
    pub violations: usize,
    pub passed: bool,
    /// The instance with the largest defect, kept when something was flagged
    /// or the check is exploratory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<DefectReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NcInstanceRecord {
    pub dimension: usize,
    pub tracial: bool,
    pub spectrum: Vec<f64>,
    pub defects: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub config: SuiteConfig,
    pub checks: Vec<CheckResult>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection_table: Option<Vec<ProjectionRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nc_instances: Option<Vec<NcInstanceRecord>>,
}

impl SuiteReport {
    fn new(suite: Suite, config: &SuiteConfig, checks: Vec<CheckResult>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        Self { suite, config: config.clone(), checks, passed, projection_table: None, nc_instances: None }
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn name_label(name: &str) -> u64 {
    // FNV-1a
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

#[derive(Default)]
struct Partial {
    instances: usize,
    skipped: usize,
    max_defect: Option<f64>,
    violations: usize,
    worst: Option<DefectReport>,
}

impl Partial {
    fn absorb(&mut self, report: DefectReport, tolerance: f64) {
        self.instances += 1;
        let d = report.defect;
        if !(d <= tolerance) {
            self.violations += 1;
        }
        let worse = match self.max_defect {
            None => true,
            Some(m) => d.is_nan() || (!m.is_nan() && d > m),
        };
        if worse {
            self.max_defect = Some(d);
            self.worst = Some(report);
        }
    }

    fn merge(&mut self, other: Partial) {
        self.instances += other.instances;
        self.skipped += other.skipped;
        self.violations += other.violations;
        if let (Some(d), Some(report)) = (other.max_defect, other.worst) {
            let worse = match self.max_defect {
                None => true,
                Some(m) => d.is_nan() || (!m.is_nan() && d > m),
            };
            if worse {
                self.max_defect = Some(d);
                self.worst = Some(report);
            }
        }
    }
}

/// Runs `sample` on `trials` instances. `Ok(None)` marks an instance as
/// skipped; errors abort the check.
fn run_check<F>(name: &str, config: &SuiteConfig, tolerance: f64, asserted: bool, sample: F) -> Result<CheckResult>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Option<DefectReport>> + Sync,
{
    let seed = mix_seed(config.seed, &[name_label(name)]);
    let chunks = config.trials.div_ceil(CHUNK);
    let partials = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let count = CHUNK.min(config.trials - k * CHUNK);
            let mut partial = Partial::default();
            for _ in 0..count {
                match sample(&mut rng)? {
                    Some(report) => partial.absorb(report, tolerance),
                    None => partial.skipped += 1,
                }
            }
            Ok(partial)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = Partial::default();
    for p in partials {
        total.merge(p);
    }
    let passed = !asserted || total.violations == 0;
    Ok(CheckResult {
        name: name.to_string(),
        asserted,
        instances: total.instances,
        skipped: total.skipped,
        tolerance,
        max_defect: total.max_defect.unwrap_or(f64::NEG_INFINITY),
        violations: total.violations,
        passed,
        worst: if total.violations > 0 || !asserted { total.worst } else { None },
    })
}

/// A deterministic check made of fixed cases rather than random trials.
fn fixed_check(name: &str, tolerance: f64, cases: Vec<DefectReport>) -> CheckResult {
    let mut total = Partial::default();
    for report in cases {
        total.absorb(report, tolerance);
    }
    CheckResult {
        name: name.to_string(),
        asserted: true,
        instances: total.instances,
        skipped: 0,
        tolerance,
        max_defect: total.max_defect.unwrap_or(f64::NEG_INFINITY),
        violations: total.violations,
        passed: total.violations == 0,
        worst: if total.violations > 0 { total.worst } else { None },
    }
}

/// An agreement `|value - target|` packaged as a defect.
fn agreement(value: f64, target: f64, inputs: Instance) -> DefectReport {
    DefectReport::new((value - target).abs(), 0.0, inputs)
}

/// An exact certificate packaged as a defect equal to its sign.
fn exact_report(check: ExactDefect, inputs: Instance) -> DefectReport {
    DefectReport::new(f64::from(check.sign), 0.0, inputs).with_tolerance(0.0)
}

fn exponent(p: f64) -> Exponent {
    Exponent::new(p).expect("suite exponents are valid")
}

fn pick<R: Rng, T: Copy>(rng: &mut R, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

fn complex_invertible<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let r = rng.random_range(INVERTIBILITY_FLOOR..=1.0);
            Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
        })
        .collect()
}

fn random_sign_vector<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    sign_vector(n, rng.random_range(0..1u64 << n))
}

/// Runs one suite.
pub fn run_suite(suite: Suite, config: &SuiteConfig) -> Result<SuiteReport> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    match suite {
        Suite::Scalar => scalar_suite(config),
        Suite::Projections => projections_suite(config),
        Suite::Majorization => majorization_suite(config),
        Suite::Reduction => reduction_suite(config),
        Suite::Nc => nc_suite(config),
    }
}

fn scalar_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let tol = config.tolerance;
    let mut checks = Vec::new();
    for n in 1..=4 {
        for pv in SCALAR_PS {
            let p = exponent(pv);
            let mu = DiscreteMeasure::uniform(n)?;
            checks.push(run_check(&format!("auxiliary uniform n={n} p={p}"), config, tol, true, |rng| {
                let f = real(&real_box(rng, n));
                let x = if rng.random_bool(0.5) { random_sign_vector(rng, n) } else { real_box(rng, n) };
                auxiliary_defect(&f, &real(&x), &mu, p).map(Some)
            })?);
        }
    }
    for n in 2..=4 {
        for pv in SCALAR_PS {
            let p = exponent(pv);
            let mu = DiscreteMeasure::uniform(n)?;
            checks.push(run_check(&format!("leibniz uniform n={n} p={p}"), config, tol, true, |rng| {
                leibniz_defect(&real(&real_box(rng, n)), &real(&real_box(rng, n)), &mu, p).map(Some)
            })?);
            checks.push(run_check(&format!("strong leibniz uniform n={n} p={p}"), config, tol, true, |rng| {
                strong_leibniz_defect(&real(&invertible_real(rng, n, INVERTIBILITY_FLOOR)), &mu, p).map(Some)
            })?);
        }
    }
    let ps_with_inf = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
    checks.push(run_check("auxiliary two-atom", config, tol, true, |rng| {
        let mu = simplex_measure(rng, 2);
        let p = Exponent::new(pick(rng, &ps_with_inf))?;
        let f = real(&real_box(rng, 2));
        let x = RandomVariable::complex(complex_box(rng, 2));
        auxiliary_defect(&f, &x, &mu, p).map(Some)
    })?);
    checks.push(run_check("auxiliary sup-norm", config, tol, true, |rng| {
        let n = rng.random_range(1..=8);
        let mu = simplex_measure(rng, n);
        let f = real(&real_box(rng, n));
        let x = RandomVariable::complex(complex_box(rng, n));
        auxiliary_defect(&f, &x, &mu, Exponent::Infinity).map(Some)
    })?);
    checks.push(run_check("leibniz sup-norm real", config, tol, true, |rng| {
        let n = rng.random_range(1..=8);
        let mu = simplex_measure(rng, n);
        leibniz_defect(&real(&real_box(rng, n)), &real(&real_box(rng, n)), &mu, Exponent::Infinity).map(Some)
    })?);
    checks.push(run_check("strong leibniz sup-norm real", config, tol, true, |rng| {
        let n = rng.random_range(1..=8);
        let mu = simplex_measure(rng, n);
        strong_leibniz_defect(&real(&invertible_real(rng, n, INVERTIBILITY_FLOOR)), &mu, Exponent::Infinity).map(Some)
    })?);
    checks.push(run_check("leibniz sigma2", config, tol, true, |rng| {
        let n = rng.random_range(1..=8);
        let mu = simplex_measure(rng, n);
        let f = RandomVariable::complex(complex_box(rng, n));
        let g = RandomVariable::complex(complex_box(rng, n));
        leibniz_defect(&f, &g, &mu, Exponent::TWO).map(Some)
    })?);
    checks.push(run_check("strong leibniz sigma2", config, tol, true, |rng| {
        let n = rng.random_range(1..=8);
        let mu = simplex_measure(rng, n);
        strong_leibniz_defect(&RandomVariable::complex(complex_invertible(rng, n)), &mu, Exponent::TWO).map(Some)
    })?);
    checks.push(run_check("square corollary", config, tol, true, |rng| {
        let n = rng.random_range(1..=8);
        let mu = simplex_measure(rng, n);
        let p = exponent(pick(rng, &SCALAR_PS));
        square_corollary_defect(&real(&nonnegative_box(rng, n)), &mu, p).map(Some)
    })?);
    checks.push(run_check("monotone corollary", config, tol, true, |rng| {
        let n = rng.random_range(1..=8);
        let mu = simplex_measure(rng, n);
        let p = exponent(pick(rng, &SCALAR_PS));
        let (f, g) = monotone_pair(rng, n);
        monotone_corollary_defect(&real(&f), &real(&g), &mu, p).map(Some)
    })?);
    let exact_ps = [Exponent::ONE, Exponent::TWO, Exponent::Infinity];
    checks.push(run_check("rough leibniz uniform", config, tol, true, |rng| {
        let n = rng.random_range(2..=8);
        let p = pick(rng, &exact_ps);
        let op = uniform_exact_norm(n, p)?;
        let mu = DiscreteMeasure::uniform(n)?;
        let f = RandomVariable::complex(complex_box(rng, n));
        let g = RandomVariable::complex(complex_box(rng, n));
        rough_leibniz_defect(&f, &g, &mu, p, op).map(Some)
    })?);
    checks.push(run_check("rough leibniz sigma2", config, tol, true, |rng| {
        let n = rng.random_range(1..=8);
        let mu = simplex_measure(rng, n);
        let f = RandomVariable::complex(complex_box(rng, n));
        let g = RandomVariable::complex(complex_box(rng, n));
        rough_leibniz_defect(&f, &g, &mu, Exponent::TWO, 1.0).map(Some)
    })?);
    // norms of I - P on the uniform spaces, exact where known
    let three = exponent(3.0);
    let mut op_three = [0.0; 9];
    for (n, slot) in op_three.iter_mut().enumerate().skip(2) {
        *slot = numeric_operator_p_norm(n, three, config.budget)?.lower_bound;
    }
    let op_norm = |n: usize, p: Exponent| -> Result<f64> {
        if p == three {
            Ok(op_three[n])
        } else {
            uniform_exact_norm(n, p)
        }
    };
    checks.push(run_check("renorm inverse squared", config, tol, true, |rng| {
        let n = rng.random_range(2..=8);
        let p = pick(rng, &[Exponent::TWO, three]);
        let mu = DiscreteMeasure::uniform(n)?;
        let f = real(&invertible_real(rng, n, INVERTIBILITY_FLOOR));
        renorm_inverse_defects(&f, &mu, p, op_norm(n, p)?).map(|(first, _)| Some(first))
    })?);
    checks.push(run_check("renorm inverse mean", config, tol, true, |rng| {
        let n = rng.random_range(2..=8);
        let p = pick(rng, &[Exponent::ONE, Exponent::TWO, three, Exponent::Infinity]);
        let mu = DiscreteMeasure::uniform(n)?;
        let f = real(&invertible_real(rng, n, INVERTIBILITY_FLOOR));
        renorm_inverse_defects(&f, &mu, p, op_norm(n, p)?).map(|(_, second)| Some(second))
    })?);
    if config.exact {
        checks.extend(scalar_exact_checks(config)?);
    }
    Ok(SuiteReport::new(Suite::Scalar, config, checks))
}

fn small_rationals<R: Rng>(rng: &mut R, n: usize, nonzero: bool) -> Vec<Rational> {
    (0..n)
        .map(|_| loop {
            let den = rng.random_range(1..=8i64);
            let num = rng.random_range(-den..=den);
            if !(nonzero && num == 0) {
                break rational(num, den);
            }
        })
        .collect()
}

fn rational_inputs(mu: &ExactMeasure, vectors: &[(&str, &[Rational])]) -> Instance {
    let as_f64 = |v: &[Rational]| v.iter().map(exact::to_f64).collect::<Vec<_>>();
    vectors.iter().fold(Instance::new().with_weights(&as_f64(mu.weights())), |acc, (name, v)| {
        acc.with(name, Data::Real(as_f64(v)))
    })
}

fn random_exact_measure<R: Rng>(rng: &mut R, n: usize) -> ExactMeasure {
    rational_measure(rng, n, 8).to_exact()
}

fn scalar_exact_checks(config: &SuiteConfig) -> Result<Vec<CheckResult>> {
    let mut checks = Vec::new();
    for n in 1..=4 {
        checks.push(run_check(&format!("exact auxiliary uniform n={n} p=1"), config, 0.0, true, |rng| {
            let mu = ExactMeasure::uniform(n)?;
            let f = small_rationals(rng, n, false);
            let x = small_rationals(rng, n, false);
            let check = exact::auxiliary_defect(&f, &x, &mu, Exponent::ONE)?;
            Ok(Some(exact_report(check, rational_inputs(&mu, &[("f", &f), ("x", &x)]))))
        })?);
    }
    for (label, p) in [("sigma2", Exponent::TWO), ("sup-norm", Exponent::Infinity)] {
        checks.push(run_check(&format!("exact leibniz {label}"), config, 0.0, true, |rng| {
            let n = rng.random_range(1..=6);
            let mu = random_exact_measure(rng, n);
            let f = small_rationals(rng, n, false);
            let g = small_rationals(rng, n, false);
            let check = exact::leibniz_defect(&f, &g, &mu, p)?;
            Ok(Some(exact_report(check, rational_inputs(&mu, &[("f", &f), ("g", &g)]))))
        })?);
        checks.push(run_check(&format!("exact strong leibniz {label}"), config, 0.0, true, |rng| {
            let n = rng.random_range(1..=6);
            let mu = random_exact_measure(rng, n);
            let f = small_rationals(rng, n, true);
            let check = exact::strong_leibniz_defect(&f, &mu, p)?;
            Ok(Some(exact_report(check, rational_inputs(&mu, &[("f", &f)]))))
        })?);
    }
    checks.push(run_check("exact square corollary", config, 0.0, true, |rng| {
        let n = rng.random_range(1..=6);
        let mu = random_exact_measure(rng, n);
        let f: Vec<Rational> = small_rationals(rng, n, false).into_iter().map(|r| r.abs()).collect();
        let p = pick(rng, &[Exponent::ONE, Exponent::TWO, Exponent::Infinity]);
        let check = exact::square_defect(&f, &mu, p)?;
        Ok(Some(exact_report(check, rational_inputs(&mu, &[("f", &f)]))))
    })?);
    Ok(checks)
}

fn projections_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let exact_ps = [Exponent::ONE, Exponent::TWO, Exponent::Infinity];
    let mut cases = Vec::new();
    for n in 1..=10 {
        for p in exact_ps {
            let estimate = numeric_operator_p_norm(n, p, config.budget)?;
            let target = uniform_exact_norm(n, p)?;
            let inputs = Instance::new()
                .with("n", Data::Real(vec![n as f64]))
                .with("p", Data::Real(vec![p.value()]))
                .with("witness", Data::Real(estimate.witness.clone()));
            cases.push(agreement(estimate.lower_bound, target, inputs));
        }
    }
    let mut checks = vec![fixed_check("numeric operator norm matches exact", PROJECTION_TOLERANCE, cases)];

    let franchetti = |p: f64| franchetti_norm(exponent(p), DEFAULT_FRANCHETTI_GRID).map(|v| v.value);
    let p_input = |p: f64| Instance::new().with("p", Data::Real(vec![p]));
    checks.push(fixed_check(
        "franchetti at p=2 equals one",
        FRANCHETTI_TOLERANCE,
        vec![agreement(franchetti(2.0)?, 1.0, p_input(2.0))],
    ));
    let mut symmetric = Vec::new();
    for p in FRANCHETTI_GRID {
        let q = exponent(p).conjugate().value();
        symmetric.push(agreement(franchetti(p)?, franchetti(q)?, p_input(p)));
    }
    checks.push(fixed_check("franchetti conjugate symmetry", FRANCHETTI_TOLERANCE, symmetric));
    let mut bounded = Vec::new();
    for p in FRANCHETTI_GRID {
        let bound = interpolation_bound(exponent(p)).derived;
        bounded.push(DefectReport::new(franchetti(p)?, bound, p_input(p)));
    }
    checks.push(fixed_check("franchetti below interpolation bound", FRANCHETTI_TOLERANCE, bounded));
    let mut in_range = Vec::new();
    for p in FRANCHETTI_GRID {
        let v = franchetti(p)?;
        in_range.push(DefectReport::new((1.0 - v).max(v - 2.0), 0.0, p_input(p)));
    }
    checks.push(fixed_check("franchetti within [1, 2]", FRANCHETTI_TOLERANCE, in_range));

    let mut ps: Vec<Exponent> = vec![Exponent::ONE];
    ps.extend(FRANCHETTI_GRID.iter().map(|p| exponent(*p)));
    ps.push(Exponent::Infinity);
    let table = projection_table(&ps, &[2, 3, 4, 5, 10], config.budget)?;
    let mut report = SuiteReport::new(Suite::Projections, config, checks);
    report.projection_table = Some(table);
    Ok(report)
}

fn majorization_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let ps = [Exponent::ONE, exponent(1.5), Exponent::TWO, exponent(3.0), Exponent::Infinity];
    let mut checks = Vec::new();
    for n in 2..=8 {
        let mut name = format!("majorization n={n}");
        checks.push(run_check(&name, config, crate::structure::MAJORIZATION_TOLERANCE, true, |rng| {
            let (f, g) = aligned_pair(rng, n);
            let report = schur_leibniz_verify(&f, &g, n, Exponent::ONE)?;
            let worst_slack = report.slacks.iter().fold(0.0f64, |a, s| a.max(-s));
            let total_gap = report.slacks.last().map_or(0.0, |s| s.abs());
            let inputs = Instance::new().with("f", Data::Real(f)).with("g", Data::Real(g));
            Ok(Some(DefectReport::new(worst_slack.max(total_gap), 0.0, inputs)))
        })?);
        name = format!("aligned leibniz n={n}");
        checks.push(run_check(&name, config, config.tolerance, true, |rng| {
            let (f, g) = aligned_pair(rng, n);
            let p = pick(rng, &ps);
            Ok(Some(schur_leibniz_verify(&f, &g, n, p)?.defect))
        })?);
    }
    // Extreme points of the centered unit ball for small rational measures.
    let extreme_trials = config.trials.min(2000);
    let extreme_config = SuiteConfig { trials: extreme_trials, ..config.clone() };
    checks.push(run_check("extreme point distances", &extreme_config, 0.0, true, |rng| {
        let n = rng.random_range(1..=6);
        let mu = random_exact_measure(rng, n);
        let one = Rational::from_integer(1.into());
        let mut worst = -1i8;
        for point in extreme_mean_zero_points(&mu)? {
            let (a, b, c) = point.l1_distances(&mu)?;
            let centered = exact::expectation(&point.values, &mu)? == Rational::from_integer(0.into());
            let ok = a == one && b == one && c <= one && centered;
            worst = worst.max(if ok { -1 } else { 1 });
        }
        let weights: Vec<f64> = mu.weights().iter().map(exact::to_f64).collect();
        Ok(Some(DefectReport::new(f64::from(worst), 0.0, Instance::new().with_weights(&weights))))
    })?);
    Ok(SuiteReport::new(Suite::Majorization, config, checks))
}

fn reduction_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let nu_inputs = |counts: &[u64], f: &[f64]| {
        Instance::new()
            .with("counts", Data::Real(counts.iter().map(|c| *c as f64).collect()))
            .with("f", Data::Real(f.to_vec()))
    };
    checks.push(run_check("replication preserves expectation and sup norm", config, 0.0, true, |rng| {
        let n = rng.random_range(1..=6);
        let nu = rational_measure(rng, n, 10);
        let f = real_box(rng, n);
        let fx = exact::from_f64_slice(&f)?;
        let phi = replicate_values(&fx, &nu)?;
        let lambda = ExactMeasure::uniform(nu.denominator as usize)?;
        let same_mean = exact::expectation(&fx, &nu.to_exact())? == exact::expectation(&phi, &lambda)?;
        let same_sup = exact::sup_norm(&fx) == exact::sup_norm(&phi);
        Ok(Some(DefectReport::new(if same_mean && same_sup { 0.0 } else { 1.0 }, 0.0, nu_inputs(&nu.counts, &f))))
    })?);
    for p in [Exponent::ONE, Exponent::TWO] {
        checks.push(run_check(&format!("replication preserves sigma p={p} exactly"), config, 0.0, true, |rng| {
            let n = rng.random_range(1..=6);
            let nu = rational_measure(rng, n, 10);
            let f = real_box(rng, n);
            let fx = exact::from_f64_slice(&f)?;
            let phi = replicate_values(&fx, &nu)?;
            let lambda = ExactMeasure::uniform(nu.denominator as usize)?;
            let lhs = exact::centered_moment(&fx, &nu.to_exact(), p)?;
            let rhs = exact::centered_moment(&phi, &lambda, p)?;
            Ok(Some(DefectReport::new(if lhs == rhs { 0.0 } else { 1.0 }, 0.0, nu_inputs(&nu.counts, &f))))
        })?);
    }
    for pv in [1.5, 3.0] {
        let p = exponent(pv);
        checks.push(run_check(
            &format!("replication preserves sigma p={p}"),
            config,
            REPLICATION_TOLERANCE,
            true,
            |rng| {
                let n = rng.random_range(1..=6);
                let nu = rational_measure(rng, n, 10);
                let f = real_box(rng, n);
                let gaps = replication_gaps(&real(&f), &nu, p)?;
                Ok(Some(DefectReport::new(gaps[2], 0.0, nu_inputs(&nu.counts, &f))))
            },
        )?);
    }
    checks.push(run_check("replication is multiplicative", config, 0.0, true, |rng| {
        let n = rng.random_range(1..=6);
        let nu = rational_measure(rng, n, 10);
        let f = RandomVariable::complex(complex_box(rng, n));
        let g = RandomVariable::complex(complex_box(rng, n));
        let lhs = replicate(&f.product(&g)?, &nu)?;
        let rhs = replicate(&f, &nu)?.product(&replicate(&g, &nu)?)?;
        let inputs = Instance::new().with_variable("f", &f).with_variable("g", &g);
        Ok(Some(DefectReport::new(if lhs == rhs { 0.0 } else { 1.0 }, 0.0, inputs)))
    })?);
    checks.push(run_check("rationalize within eps", config, 0.0, true, |rng| {
        let n = rng.random_range(1..=6);
        let mu = simplex_measure(rng, n);
        let eps = pick(rng, &[1e-2, 1e-3, 1e-4]);
        let p = pick(rng, &[Exponent::ONE, exponent(1.5), Exponent::TWO, exponent(3.0), Exponent::Infinity]);
        let nu = rationalize(&mu, eps)?;
        let exact_total = nu.counts.iter().sum::<u64>() == nu.denominator;
        let close = nu.to_measure().weights().iter().zip(mu.weights()).all(|(a, b)| (a - b).abs() <= eps);
        let f = real(&real_box(rng, n));
        let g = real(&real_box(rng, n));
        let moments = reduction_check(&f, &g, &mu, &nu, p)?.holds();
        let inputs = Instance::new().with_weights(mu.weights()).with("eps", Data::Real(vec![eps]));
        Ok(Some(DefectReport::new(if exact_total && close && moments { 0.0 } else { 1.0 }, 0.0, inputs)))
    })?);
    Ok(SuiteReport::new(Suite::Reduction, config, checks))
}

fn nc_instance(d: usize, tracial: bool, rng: &mut ChaCha8Rng) -> DensityState {
    if tracial {
        DensityState::tracial(d)
    } else {
        DensityState::random_faithful(d, rng)
    }
}

fn nc_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let tol = config.tolerance;
    let mut checks = Vec::new();
    for d in 2..=4 {
        checks.push(run_check(&format!("commutator norm d={d}"), config, COMMUTATOR_TOLERANCE, true, |rng| {
            let w = nc_instance(d, false, rng);
            let a = AlgebraElement::random(d, rng);
            let value = commutator_dirac_norm(&a, &w)?;
            let target = nc_sigma2_max(&a, &w)?;
            let inputs =
                Instance::new().with("rho", Data::Matrix(w.rho().clone())).with("a", Data::Matrix(a.matrix().clone()));
            Ok(Some(agreement(value, target, inputs)))
        })?);
        checks.push(run_check(&format!("lemma d={d}"), config, tol, true, |rng| {
            let w = nc_instance(d, false, rng);
            let a = AlgebraElement::random(d, rng);
            let x = AlgebraElement::random(d, rng);
            lemma_defect(&a, &x, &w).map(Some)
        })?);
        checks.push(run_check(&format!("module bound d={d}"), config, tol, true, |rng| {
            let w = nc_instance(d, false, rng);
            let a = AlgebraElement::random(d, rng);
            let x = AlgebraElement::random(d, rng);
            module_bound_defect(&x, &a, &w).map(Some)
        })?);
        checks.push(run_check(&format!("inverse inequality d={d}"), config, tol, true, |rng| {
            let w = nc_instance(d, false, rng);
            let a = AlgebraElement::random(d, rng);
            match inverse_inequality_defect(&a, &w) {
                Err(Error::Singular(_)) => Ok(None),
                other => other.map(Some),
            }
        })?);
        checks.push(run_check(&format!("tracial product leibniz d={d}"), config, tol, true, |rng| {
            let w = nc_instance(d, true, rng);
            let a = AlgebraElement::random(d, rng);
            let b = AlgebraElement::random(d, rng);
            product_leibniz_nc_defect(&a, &b, &w).map(Some)
        })?);
        checks.push(run_check(&format!("derivation norm d={d}"), config, tol, true, |rng| {
            let w = nc_instance(d, true, rng);
            let a = AlgebraElement::random(d, rng);
            let check = derivation_construct_norm(&a, &w, config.samples, rng.random())?;
            let deviation = [
                (check.sampled_sup - check.closed_form).abs(),
                (check.unit_sample - check.closed_form).abs(),
                (check.t_norm_witness - check.element_norm).abs(),
                check.t_norm_sample_max - check.element_norm,
                check.composition_error,
            ]
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
            Ok(Some(DefectReport::new(deviation, 0.0, Instance::new().with("a", Data::Matrix(a.matrix().clone())))))
        })?);
        checks.push(run_check(&format!("non-tracial product leibniz d={d}"), config, tol, false, |rng| {
            let w = nc_instance(d, false, rng);
            let a = AlgebraElement::random(d, rng);
            let b = AlgebraElement::random(d, rng);
            product_leibniz_nc_defect(&a, &b, &w).map(Some)
        })?);
    }
    let mut report = SuiteReport::new(Suite::Nc, config, checks);
    if config.record_instances {
        report.nc_instances = Some(nc_records(config)?);
    }
    Ok(report)
}

/// Per-instance defects of the matrix theorems on a separate stream.
fn nc_records(config: &SuiteConfig) -> Result<Vec<NcInstanceRecord>> {
    let mut records = Vec::new();
    for d in 2..=4 {
        let seed = mix_seed(config.seed, &[name_label("nc records"), d as u64]);
        let chunks = config.trials.div_ceil(CHUNK);
        let parts = (0..chunks)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(seed, k as u64);
                let count = CHUNK.min(config.trials - k * CHUNK);
                (0..count)
                    .map(|i| {
                        let tracial = (k * CHUNK + i).is_multiple_of(2);
                        let w = nc_instance(d, tracial, &mut rng);
                        let a = AlgebraElement::random(d, &mut rng);
                        let b = AlgebraElement::random(d, &mut rng);
                        let mut defects = vec![
                            ("lemma".to_string(), lemma_defect(&a, &b, &w)?.defect),
                            ("module_bound".to_string(), module_bound_defect(&b, &a, &w)?.defect),
                            ("product_leibniz".to_string(), product_leibniz_nc_defect(&a, &b, &w)?.defect),
                        ];
                        if let Ok(r) = inverse_inequality_defect(&a, &w) {
                            defects.push(("inverse".to_string(), r.defect));
                        }
                        Ok(NcInstanceRecord { dimension: d, tracial, spectrum: w.spectrum().to_vec(), defects })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        records.extend(parts.into_iter().flatten());
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(trials: usize) -> SuiteConfig {
        SuiteConfig { budget: 4000, ..SuiteConfig::new(trials, 7) }
    }

    #[test]
    fn every_suite_passes_on_a_small_budget() {
        for suite in Suite::ALL {
            let mut config = small(300);
            config.exact = true;
            let report = run_suite(suite, &config).unwrap();
            for c in &report.checks {
                assert!(c.passed, "{suite}: {} max {} worst {:?}", c.name, c.max_defect, c.worst);
                assert!(c.instances > 0, "{suite}: {} ran no instances", c.name);
            }
            assert!(report.passed);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite(Suite::Nc, &small(50)).unwrap();
        let b = run_suite(Suite::Nc, &small(50)).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        let c = run_suite(Suite::Nc, &SuiteConfig { seed: 8, ..small(50) }).unwrap();
        assert_ne!(a.checks[1].max_defect, c.checks[1].max_defect);
    }

    #[test]
    fn chunking_counts_every_trial() {
        let r = run_suite(Suite::Reduction, &small(CHUNK + 5)).unwrap();
        assert!(r.checks.iter().all(|c| c.instances == CHUNK + 5));
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("vector".parse::<Suite>().is_err());
        assert!(run_suite(Suite::Scalar, &small(0)).is_err());
    }

    #[test]
    fn nc_records_are_kept_on_request() {
        let config = SuiteConfig { record_instances: true, ..small(10) };
        let r = run_suite(Suite::Nc, &config).unwrap();
        let records = r.nc_instances.unwrap();
        assert_eq!(records.len(), 30);
        assert!(records.iter().any(|r| r.tracial) && records.iter().any(|r| !r.tracial));
    }
}

//! Counterexample search by multi-start coordinate pattern search, exact
//! reproductions of the two classical counterexamples to the auxiliary
//! inequality, and a scan of the Leibniz property for uniform measures.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{self, format_rational, integer, rational, ExactDefect, ExactMeasure, ExactNorm, Rational};
use crate::inequalities::{auxiliary_defect, leibniz_defect, real, strong_leibniz_defect};
use crate::measure::{DiscreteMeasure, Exponent};
use crate::ncalg::{product_leibniz_nc_defect, AlgebraElement, DensityState, Matrix};
use crate::report::{Data, DefectReport, DEFAULT_TOLERANCE};
use crate::sampling::{mix_seed, simplex_measure, stream_rng};
use crate::structure::sign_vector;

pub const DEFAULT_RESTARTS: usize = 20;
pub const DEFAULT_STRONG_FLOOR: f64 = 0.05;
pub const DEFAULT_BUDGET: usize = 20_000;
const INITIAL_STEP: f64 = 0.5;
const FINAL_STEP: f64 = 1e-9;
const POLISH_STEP: f64 = 1e-3;
const POLISH_LEVELS: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    Leibniz,
    StrongLeibniz,
    Auxiliary,
    NcProduct,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Leibniz => "leibniz",
            Objective::StrongLeibniz => "strong_leibniz",
            Objective::Auxiliary => "auxiliary",
            Objective::NcProduct => "nc_product",
        }
    }

    fn label(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leibniz" => Ok(Objective::Leibniz),
            "strong_leibniz" => Ok(Objective::StrongLeibniz),
            "auxiliary" => Ok(Objective::Auxiliary),
            "nc_product" => Ok(Objective::NcProduct),
            other => Err(Error::InvalidArgument(format!("unknown objective `{other}`"))),
        }
    }
}

/// Where the measure of each restart comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum MeasureFamily {
    Uniform,
    /// A fresh uniform draw from the simplex for every restart.
    SimplexRandom,
    Fixed(DiscreteMeasure),
}

/// The state used by the matrix objective.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFamily {
    Tracial,
    /// One random faithful non-tracial state per task.
    Nontracial,
    /// Diagonal state with this spectrum.
    Spectrum(Vec<f64>),
}

impl FromStr for StateFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tracial" => Ok(StateFamily::Tracial),
            "nontracial" => Ok(StateFamily::Nontracial),
            list => list
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(StateFamily::Spectrum)
                .map_err(|_| Error::InvalidArgument(format!("unknown state `{list}`"))),
        }
    }
}

/// One search problem. For [`Objective::NcProduct`], `n` is the matrix dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchTask {
    pub objective: Objective,
    pub n: usize,
    pub p: Exponent,
    pub measure: MeasureFamily,
    /// Total objective evaluations across all restarts.
    pub budget: usize,
    pub seed: u64,
    pub restarts: usize,
    /// Lower bound on `|f_i|` for the strong-Leibniz objective.
    pub strong_floor: f64,
    pub state: StateFamily,
}

impl SearchTask {
    pub fn new(objective: Objective, n: usize, p: Exponent) -> Self {
        Self {
            objective,
            n,
            p,
            measure: MeasureFamily::Uniform,
            budget: DEFAULT_BUDGET,
            seed: 0,
            restarts: DEFAULT_RESTARTS,
            strong_floor: DEFAULT_STRONG_FLOOR,
            state: StateFamily::Tracial,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_measure(mut self, measure: MeasureFamily) -> Self {
        self.measure = measure;
        self
    }

    pub fn with_state(mut self, state: StateFamily) -> Self {
        self.state = state;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(Error::InvalidArgument("budget must be positive".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("at least one restart is needed".into()));
        }
        if !(self.strong_floor > 0.0 && self.strong_floor <= 1.0) {
            return Err(Error::InvalidArgument("strong floor must lie in (0, 1]".into()));
        }
        if let MeasureFamily::Fixed(mu) = &self.measure {
            if mu.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: mu.len() });
            }
        }
        if self.objective == Objective::Auxiliary && self.n > 63 {
            return Err(Error::TooLarge { size: self.n, limit: 63 });
        }
        if let StateFamily::Spectrum(s) = &self.state {
            if self.objective == Objective::NcProduct && s.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, found: s.len() });
            }
        }
        Ok(())
    }

    /// Whether the objective is a proved inequality on this task's domain,
    /// so that a positive defect points at a numerical or implementation fault.
    pub fn is_proved(&self) -> bool {
        let classical = self.p.is_infinite() || self.p == Exponent::TWO;
        match self.objective {
            Objective::Leibniz | Objective::StrongLeibniz => {
                classical || (self.n <= 4 && self.measure == MeasureFamily::Uniform)
            }
            Objective::Auxiliary => {
                self.p.is_infinite() || self.n <= 2 || (self.n <= 4 && self.measure == MeasureFamily::Uniform)
            }
            Objective::NcProduct => self.state == StateFamily::Tracial,
        }
    }

    fn nc_state(&self) -> Result<DensityState> {
        match &self.state {
            StateFamily::Tracial => Ok(DensityState::tracial(self.n)),
            StateFamily::Nontracial => Ok(DensityState::random_faithful(self.n, &mut stream_rng(self.seed, u64::MAX))),
            StateFamily::Spectrum(s) => DensityState::from_spectrum(s),
        }
    }
}

/// Outcome of [`maximize_defect`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub objective: Objective,
    pub n: usize,
    pub p: Exponent,
    pub seed: u64,
    pub best_defect: f64,
    /// The best instance with its full defect report.
    pub witness: DefectReport,
    pub evaluations_used: usize,
    /// True when some restart stopped on the budget rather than on step size.
    pub budget_exhausted: bool,
    pub best_restart: usize,
    /// Best defect reached by each restart, in restart order.
    pub history: Vec<f64>,
    /// Exact re-evaluation of the witness for `p` in `{1, 2, inf}`.
    pub exact_check: Option<ExactDefect>,
}

/// Parameter space of one objective: coordinates in `[-1, 1]`, plus binary
/// flip coordinates for the sign vector of the auxiliary objective.
/// Each continuous coordinate is moved by `±step` or snapped to a face of the
/// box; late in a restart it may also be set equal to another coordinate of the
/// same vector. Earlier merging tends to collapse onto constant vectors, where
/// every defect vanishes. Coordinates sharing a value also move as a group.
struct Problem {
    objective: Objective,
    n: usize,
    p: Exponent,
    floor: f64,
    state: Option<DensityState>,
}

impl Problem {
    fn continuous_len(&self) -> usize {
        match self.objective {
            Objective::Leibniz => 2 * self.n,
            Objective::StrongLeibniz | Objective::Auxiliary => self.n,
            Objective::NcProduct => 4 * self.n * self.n,
        }
    }

    fn flip_len(&self) -> usize {
        if self.objective == Objective::Auxiliary {
            self.n
        } else {
            0
        }
    }

    /// Coordinates of the vector containing coordinate `i`; empty for matrices.
    fn block_of(&self, i: usize) -> std::ops::Range<usize> {
        match self.objective {
            Objective::NcProduct => 0..0,
            _ => {
                let start = i / self.n * self.n;
                start..start + self.n
            }
        }
    }

    /// The point rescaled to fill the box. The Leibniz defect is homogeneous
    /// in `f` and in `g`; the auxiliary defect is also invariant under adding
    /// constants to `f`. So positive defects can only grow.
    fn stretched(&self, u: &[f64]) -> Option<Vec<f64>> {
        let n = self.n;
        let scale = |v: &[f64]| {
            let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            (m > 0.0).then(|| v.iter().map(|x| (x / m).clamp(-1.0, 1.0)).collect::<Vec<_>>())
        };
        match self.objective {
            Objective::Leibniz => {
                let mut f = scale(&u[..n])?;
                f.extend(scale(&u[n..])?);
                Some(f)
            }
            Objective::Auxiliary => {
                let lo = u.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (hi > lo).then(|| u.iter().map(|x| (2.0 * (x - lo) / (hi - lo) - 1.0).clamp(-1.0, 1.0)).collect())
            }
            _ => None,
        }
    }

    fn floored(&self, u: f64) -> f64 {
        let magnitude = self.floor + (1.0 - self.floor) * u.abs();
        if u < 0.0 {
            -magnitude
        } else {
            magnitude
        }
    }

    fn matrices(&self, u: &[f64]) -> (AlgebraElement, AlgebraElement) {
        let d = self.n;
        let block = |offset: usize| {
            Matrix::from_fn(d, d, |i, j| {
                let k = offset + 2 * (i * d + j);
                Complex64::new(u[k], u[k + 1])
            })
        };
        (AlgebraElement::new(block(0)).expect("square"), AlgebraElement::new(block(2 * d * d)).expect("square"))
    }

    fn report(&self, u: &[f64], signs: u64, mu: &DiscreteMeasure) -> Result<DefectReport> {
        let n = self.n;
        match self.objective {
            Objective::Leibniz => leibniz_defect(&real(&u[..n]), &real(&u[n..]), mu, self.p),
            Objective::StrongLeibniz => {
                let f: Vec<f64> = u.iter().map(|v| self.floored(*v)).collect();
                strong_leibniz_defect(&real(&f), mu, self.p)
            }
            Objective::Auxiliary => auxiliary_defect(&real(u), &real(&sign_vector(n, signs)), mu, self.p),
            Objective::NcProduct => {
                let (a, b) = self.matrices(u);
                product_leibniz_nc_defect(&a, &b, self.state.as_ref().expect("state"))
            }
        }
    }

    fn value(&self, u: &[f64], signs: u64, mu: &DiscreteMeasure) -> f64 {
        match self.report(u, signs, mu) {
            Ok(r) if r.defect.is_finite() => r.defect,
            _ => f64::NEG_INFINITY,
        }
    }
}

struct RestartOutcome {
    best: f64,
    point: Vec<f64>,
    signs: u64,
    measure: DiscreteMeasure,
    evaluations: usize,
    exhausted: bool,
}

fn run_restart(problem: &Problem, task: &SearchTask, index: usize, budget: usize) -> Result<RestartOutcome> {
    let total_budget = budget;
    let budget = budget - (budget / 10).min(POLISH_LEVELS as usize);
    let mut rng = stream_rng(task.seed, index as u64);
    let measure = match &task.measure {
        MeasureFamily::Uniform => DiscreteMeasure::uniform(task.n)?,
        MeasureFamily::SimplexRandom => simplex_measure(&mut rng, task.n),
        MeasureFamily::Fixed(mu) => mu.clone(),
    };
    let dims = problem.continuous_len();
    let flips = problem.flip_len();
    let all_signs: u64 = if flips > 0 { (1u64 << flips) - 1 } else { 0 };
    // constant sign vectors give defect exactly zero and trap the search
    let admissible = |s: u64| flips < 2 || (s != 0 && s != all_signs);
    let mut point: Vec<f64> = (0..dims).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let mut signs: u64 = if flips > 0 { rng.random_range(0..=all_signs) } else { 0 };
    while !admissible(signs) {
        signs = rng.random_range(0..=all_signs);
    }
    let mut best = problem.value(&point, signs, &measure);
    let mut evaluations = 1;
    let mut step = INITIAL_STEP;
    let mut exhausted = false;
    'outer: while step >= FINAL_STEP {
        let mut improved = false;
        for i in 0..=dims + flips {
            let candidates: Vec<(Vec<f64>, u64)> = if i == 0 {
                problem.stretched(&point).into_iter().filter(|s| *s != point).map(|s| (s, signs)).collect()
            } else if i <= dims {
                let c = i - 1;
                let mut targets = vec![point[c] + step, point[c] - step, 1.0, -1.0];
                if step <= POLISH_STEP || 4 * evaluations >= 3 * budget {
                    targets.extend(problem.block_of(c).filter(|&j| j != c).map(|j| point[j]));
                }
                let mut moves: Vec<(Vec<f64>, u64)> = targets
                    .iter()
                    .filter_map(|target| {
                        let moved = target.clamp(-1.0, 1.0);
                        (moved != point[c]).then(|| {
                            let mut next = point.clone();
                            next[c] = moved;
                            (next, signs)
                        })
                    })
                    .collect();
                let group: Vec<usize> = problem.block_of(c).filter(|&j| point[j] == point[c]).collect();
                if group.len() > 1 {
                    for delta in [step, -step] {
                        let moved = (point[c] + delta).clamp(-1.0, 1.0);
                        if moved != point[c] {
                            let mut next = point.clone();
                            group.iter().for_each(|&j| next[j] = moved);
                            moves.push((next, signs));
                        }
                    }
                }
                moves
            } else {
                let flipped = signs ^ (1 << (i - dims - 1));
                if admissible(flipped) {
                    vec![(point.clone(), flipped)]
                } else {
                    Vec::new()
                }
            };
            for (candidate, candidate_signs) in candidates {
                if evaluations >= budget {
                    exhausted = true;
                    break 'outer;
                }
                let v = problem.value(&candidate, candidate_signs, &measure);
                evaluations += 1;
                if v > best {
                    let mut displacement: Vec<f64> = candidate.iter().zip(&point).map(|(a, b)| a - b).collect();
                    best = v;
                    point = candidate;
                    signs = candidate_signs;
                    improved = true;
                    // expand along a successful continuous move
                    while displacement.iter().any(|d| *d != 0.0) && evaluations < budget {
                        displacement.iter_mut().for_each(|d| *d *= 2.0);
                        let next: Vec<f64> =
                            point.iter().zip(&displacement).map(|(a, d)| (a + d).clamp(-1.0, 1.0)).collect();
                        if next == point {
                            break;
                        }
                        let v = problem.value(&next, signs, &measure);
                        evaluations += 1;
                        if v <= best {
                            break;
                        }
                        best = v;
                        point = next;
                    }
                    break;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    // round to dyadic grids so that near-vertex points land on exact vertices
    for k in 1..=POLISH_LEVELS {
        if evaluations >= total_budget {
            break;
        }
        let grid = f64::from(1u32 << k);
        let rounded: Vec<f64> = point.iter().map(|x| ((x * grid).round() / grid).clamp(-1.0, 1.0)).collect();
        if rounded == point {
            continue;
        }
        let v = problem.value(&rounded, signs, &measure);
        evaluations += 1;
        if v > best {
            best = v;
            point = rounded;
        }
    }
    Ok(RestartOutcome { best, point, signs, measure, evaluations, exhausted })
}

/// Maximizes the task's defect over the unit sup-norm ball.
///
/// The budget is split evenly over the restarts, which run in parallel on
/// independent RNG streams; the best restart wins, ties going to the lowest
/// index, so the result depends only on the task.
pub fn maximize_defect(task: &SearchTask) -> Result<SearchResult> {
    task.validate()?;
    let state = if task.objective == Objective::NcProduct { Some(task.nc_state()?) } else { None };
    let problem = Problem { objective: task.objective, n: task.n, p: task.p, floor: task.strong_floor, state };
    let per_restart = (task.budget / task.restarts).max(1);
    let outcomes = (0..task.restarts)
        .into_par_iter()
        .map(|k| run_restart(&problem, task, k, per_restart))
        .collect::<Result<Vec<_>>>()?;
    let mut best_restart = 0;
    for (k, o) in outcomes.iter().enumerate() {
        if o.best > outcomes[best_restart].best {
            best_restart = k;
        }
    }
    let winner = &outcomes[best_restart];
    let witness = problem.report(&winner.point, winner.signs, &winner.measure)?;
    let exact_check = exact_recheck(task, &witness)?;
    Ok(SearchResult {
        objective: task.objective,
        n: task.n,
        p: task.p,
        seed: task.seed,
        best_defect: witness.defect,
        witness,
        evaluations_used: outcomes.iter().map(|o| o.evaluations).sum(),
        budget_exhausted: outcomes.iter().any(|o| o.exhausted),
        best_restart,
        history: outcomes.iter().map(|o| o.best).collect(),
        exact_check,
    })
}

fn real_input(report: &DefectReport, name: &str) -> Result<Vec<f64>> {
    match report.inputs.get(name) {
        Some(Data::Real(v)) => Ok(v.clone()),
        _ => Err(Error::InvalidArgument(format!("witness has no real input `{name}`"))),
    }
}

fn matrix_input(report: &DefectReport, name: &str) -> Result<Matrix> {
    match report.inputs.get(name) {
        Some(Data::Matrix(m)) => Ok(m.clone()),
        _ => Err(Error::InvalidArgument(format!("witness has no matrix input `{name}`"))),
    }
}

/// Recomputes the defect of a stored witness from its serialized inputs.
pub fn recompute_defect(objective: Objective, p: Exponent, witness: &DefectReport) -> Result<f64> {
    if objective == Objective::NcProduct {
        let state = DensityState::new(matrix_input(witness, "rho")?)?;
        let a = AlgebraElement::new(matrix_input(witness, "a")?)?;
        let b = AlgebraElement::new(matrix_input(witness, "b")?)?;
        return Ok(product_leibniz_nc_defect(&a, &b, &state)?.defect);
    }
    let mu = DiscreteMeasure::new(real_input(witness, "weights")?)?;
    let f = real(&real_input(witness, "f")?);
    let report = match objective {
        Objective::Leibniz => leibniz_defect(&f, &real(&real_input(witness, "g")?), &mu, p)?,
        Objective::StrongLeibniz => strong_leibniz_defect(&f, &mu, p)?,
        Objective::Auxiliary => auxiliary_defect(&f, &real(&real_input(witness, "x")?), &mu, p)?,
        Objective::NcProduct => unreachable!(),
    };
    Ok(report.defect)
}

fn exact_recheck(task: &SearchTask, witness: &DefectReport) -> Result<Option<ExactDefect>> {
    if !task.p.is_exact_supported() || task.objective == Objective::NcProduct {
        return Ok(None);
    }
    let mu = match &task.measure {
        MeasureFamily::Uniform => ExactMeasure::uniform(task.n)?,
        _ => ExactMeasure::from_measure(&DiscreteMeasure::new(real_input(witness, "weights")?)?)?,
    };
    let f = exact::from_f64_slice(&real_input(witness, "f")?)?;
    let check = match task.objective {
        Objective::Leibniz => {
            let g = exact::from_f64_slice(&real_input(witness, "g")?)?;
            exact::leibniz_defect(&f, &g, &mu, task.p)?
        }
        Objective::StrongLeibniz => exact::strong_leibniz_defect(&f, &mu, task.p)?,
        Objective::Auxiliary => {
            let x = exact::from_f64_slice(&real_input(witness, "x")?)?;
            exact::auxiliary_defect(&f, &x, &mu, task.p)?
        }
        Objective::NcProduct => unreachable!(),
    };
    Ok(Some(check))
}

fn plain(norm: ExactNorm) -> Rational {
    norm.as_rational().cloned().expect("p = 1 norms are rational")
}

fn strings(values: &[Rational]) -> Vec<String> {
    values.iter().map(format_rational).collect()
}

/// Exact evaluation of the uniform counterexample
/// `f = (1, 0, ..., 0, -1)`, `x = (1, ..., 1, -1)` at `p = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example1Report {
    pub n: usize,
    pub f: Vec<String>,
    pub x: Vec<String>,
    pub expectation_x: String,
    pub expectation_fx: String,
    /// `||f - E f||_1`.
    pub sigma_f: String,
    /// `||f E x - E(fx)||_1`.
    pub lhs: String,
    /// `||x|| ||f - E f||_1`.
    pub rhs: String,
    pub ratio: String,
    pub defect: String,
    /// Every value equals its closed form `1 - 2/n`, `2/n`, `(4n-8)/n²`, `2 - 4/n`.
    pub matches_closed_form: bool,
}

pub fn reproduce_example1(n: usize) -> Result<Example1Report> {
    if n < 5 {
        return Err(Error::InvalidArgument(format!("the construction needs n >= 5, got {n}")));
    }
    let mu = ExactMeasure::uniform(n)?;
    let mut f = vec![Rational::zero(); n];
    f[0] = Rational::one();
    f[n - 1] = -Rational::one();
    let mut x = vec![Rational::one(); n];
    x[n - 1] = -Rational::one();
    let ex = exact::expectation(&x, &mu)?;
    let efx = exact::expectation(&exact::product(&f, &x)?, &mu)?;
    let sigma = plain(exact::centered_moment(&f, &mu, Exponent::ONE)?);
    let lhs = plain(exact::p_norm(&exact::auxiliary_vector(&f, &x, &mu)?, &mu, Exponent::ONE)?);
    let rhs = exact::sup_norm(&x) * &sigma;
    let ratio = &lhs / &rhs;
    let m = n as i64;
    let matches = ex == integer(1) - rational(2, m)
        && efx == rational(2, m)
        && sigma == rational(2, m)
        && lhs == rational(4 * m - 8, m * m)
        && rhs == rational(2, m)
        && ratio == integer(2) - rational(4, m);
    Ok(Example1Report {
        n,
        f: strings(&f),
        x: strings(&x),
        expectation_x: format_rational(&ex),
        expectation_fx: format_rational(&efx),
        sigma_f: format_rational(&sigma),
        defect: format_rational(&(&lhs - &rhs)),
        lhs: format_rational(&lhs),
        rhs: format_rational(&rhs),
        ratio: format_rational(&ratio),
        matches_closed_form: matches,
    })
}

/// Exact evaluation of the three-atom counterexample
/// `mu = (1/8, 3/4, 1/8)`, `f = (1, 0, -1)`, `x = (1, 1, -1)` at `p = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example2Report {
    pub weights: Vec<String>,
    pub f: Vec<String>,
    pub x: Vec<String>,
    pub expectation_f: String,
    pub expectation_x: String,
    pub expectation_fx: String,
    /// `f E x - E(fx)`.
    pub vector: Vec<String>,
    /// `||f E x - E(fx)||_1`.
    pub lhs: String,
    /// `||x|| ||f - E f||_1`.
    pub rhs: String,
    pub defect: String,
    pub matches_closed_form: bool,
}

pub fn reproduce_example2() -> Result<Example2Report> {
    let mu = ExactMeasure::new(vec![rational(1, 8), rational(3, 4), rational(1, 8)])?;
    let f = vec![integer(1), integer(0), integer(-1)];
    let x = vec![integer(1), integer(1), integer(-1)];
    let ef = exact::expectation(&f, &mu)?;
    let ex = exact::expectation(&x, &mu)?;
    let efx = exact::expectation(&exact::product(&f, &x)?, &mu)?;
    let vector = exact::auxiliary_vector(&f, &x, &mu)?;
    let lhs = plain(exact::p_norm(&vector, &mu, Exponent::ONE)?);
    let rhs = exact::sup_norm(&x) * plain(exact::centered_moment(&f, &mu, Exponent::ONE)?);
    let matches = ef.is_zero()
        && ex == rational(3, 4)
        && efx == rational(1, 4)
        && vector == vec![rational(1, 2), rational(-1, 4), integer(-1)]
        && lhs == rational(3, 8)
        && rhs == rational(1, 4);
    Ok(Example2Report {
        weights: strings(mu.weights()),
        f: strings(&f),
        x: strings(&x),
        expectation_f: format_rational(&ef),
        expectation_x: format_rational(&ex),
        expectation_fx: format_rational(&efx),
        vector: strings(&vector),
        defect: format_rational(&(&lhs - &rhs)),
        lhs: format_rational(&lhs),
        rhs: format_rational(&rhs),
        matches_closed_form: matches,
    })
}

/// One `(n, p, objective)` cell of a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanCell {
    pub n: usize,
    pub p: Exponent,
    pub objective: Objective,
    pub best_defect: f64,
    pub flagged: bool,
    /// The cell's inequality is proved on the uniform space.
    pub proved: bool,
    /// The auxiliary column is known to fail for `n >= 5` and is informational.
    pub diagnostic: bool,
    /// Whether a flagged witness was confirmed in exact arithmetic; `None`
    /// when the cell is not flagged or `p` has no exact backend.
    pub exact_confirmed: Option<bool>,
    pub result: SearchResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub seed: u64,
    pub budget: usize,
    pub tolerance: f64,
    pub cells: Vec<ScanCell>,
}

pub const SCAN_OBJECTIVES: [Objective; 3] = [Objective::Leibniz, Objective::StrongLeibniz, Objective::Auxiliary];

impl ScanTable {
    pub const CSV_HEADER: &'static str = "n,p,objective,best_defect,flagged";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            out.push_str(&format!("{},{},{},{:?},{}\n", c.n, c.p, c.objective, c.best_defect, c.flagged));
        }
        out
    }

    /// Flagged cells whose inequality is proved and whose witness was not
    /// refuted in exact arithmetic.
    pub fn proved_flags(&self) -> impl Iterator<Item = &ScanCell> {
        self.cells.iter().filter(|c| c.flagged && c.proved && c.exact_confirmed != Some(false))
    }

    /// Flagged cells of the Leibniz and strong-Leibniz columns.
    pub fn leibniz_flags(&self) -> impl Iterator<Item = &ScanCell> {
        self.cells.iter().filter(|c| c.flagged && !c.diagnostic)
    }
}

/// Runs [`maximize_defect`] on the uniform measure for every `n`, `p` and
/// scan objective. Cells are ordered by `n`, then `p` as given, then objective.
pub fn conjecture_scan(
    ns: &[usize],
    ps: &[Exponent],
    per_cell_budget: usize,
    seed: u64,
    tolerance: f64,
) -> Result<ScanTable> {
    let specs: Vec<(usize, usize, Objective)> = ns
        .iter()
        .flat_map(|&n| (0..ps.len()).flat_map(move |pi| SCAN_OBJECTIVES.iter().map(move |&o| (n, pi, o))))
        .collect();
    let cells = specs
        .par_iter()
        .map(|&(n, pi, objective)| {
            let task = SearchTask::new(objective, n, ps[pi])
                .with_budget(per_cell_budget)
                .with_seed(mix_seed(seed, &[n as u64, pi as u64, objective.label()]));
            let result = maximize_defect(&task)?;
            let proved = task.is_proved();
            let flagged = result.best_defect > tolerance;
            let exact_confirmed = if flagged { result.exact_check.as_ref().map(|e| e.sign > 0) } else { None };
            Ok(ScanCell {
                n,
                p: ps[pi],
                objective,
                best_defect: result.best_defect,
                flagged,
                proved,
                diagnostic: objective == Objective::Auxiliary,
                exact_confirmed,
                result,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanTable { seed, budget: per_cell_budget, tolerance, cells })
}

/// Default scan tolerance.
pub const SCAN_TOLERANCE: f64 = DEFAULT_TOLERANCE;

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> Exponent {
        Exponent::new(v).unwrap()
    }

    #[test]
    fn example1_values() {
        let r = reproduce_example1(5).unwrap();
        assert_eq!((r.lhs.as_str(), r.rhs.as_str(), r.ratio.as_str()), ("12/25", "2/5", "6/5"));
        assert_eq!(r.defect, "2/25");
        assert!(r.matches_closed_form);
        let r = reproduce_example1(6).unwrap();
        assert_eq!((r.lhs.as_str(), r.rhs.as_str(), r.ratio.as_str()), ("4/9", "1/3", "4/3"));
        assert!(reproduce_example1(4).is_err());
    }

    #[test]
    fn example1_ratio_increases_to_two() {
        let ratios: Vec<f64> = (5..40)
            .map(|n| {
                let r = reproduce_example1(n).unwrap();
                let (a, b) = r.ratio.split_once('/').unwrap();
                a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap()
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[0] < w[1]));
        assert!(ratios.iter().all(|r| *r < 2.0));
    }

    #[test]
    fn example2_values() {
        let r = reproduce_example2().unwrap();
        assert_eq!(r.lhs, "3/8");
        assert_eq!(r.rhs, "1/4");
        assert_eq!(r.vector, vec!["1/2", "-1/4", "-1/1"]);
        assert_eq!((r.expectation_f.as_str(), r.expectation_x.as_str()), ("0/1", "3/4"));
        assert!(r.matches_closed_form);
    }

    #[test]
    fn auxiliary_search_finds_the_uniform_counterexample() {
        let task = SearchTask::new(Objective::Auxiliary, 5, Exponent::ONE).with_seed(3);
        let r = maximize_defect(&task).unwrap();
        assert!(r.best_defect >= 2.0 / 25.0 - DEFAULT_TOLERANCE, "{}", r.best_defect);
        let exact = r.exact_check.as_ref().unwrap();
        assert_eq!(exact.sign, 1);
        let (a, b) = exact.defect.as_ref().unwrap().split_once('/').unwrap();
        let defect = rational(a.parse().unwrap(), b.parse().unwrap());
        assert!(defect >= rational(2, 25), "{defect}");
    }

    #[test]
    fn proved_regions_stay_nonpositive() {
        for pv in [1.0, 1.5, 3.0] {
            let r = maximize_defect(&SearchTask::new(Objective::Leibniz, 2, p(pv)).with_budget(4000)).unwrap();
            assert!(r.best_defect <= 1e-9, "p={pv}: {}", r.best_defect);
        }
        let r = maximize_defect(&SearchTask::new(Objective::Leibniz, 1, Exponent::TWO)).unwrap();
        assert_eq!(r.best_defect, 0.0);
    }

    #[test]
    fn search_is_deterministic_and_sound() {
        for objective in [Objective::Leibniz, Objective::StrongLeibniz, Objective::Auxiliary] {
            let task = SearchTask::new(objective, 4, p(1.5))
                .with_budget(3000)
                .with_seed(9)
                .with_measure(MeasureFamily::SimplexRandom);
            let a = maximize_defect(&task).unwrap();
            let b = maximize_defect(&task).unwrap();
            assert_eq!(a, b);
            let again = recompute_defect(objective, task.p, &a.witness).unwrap();
            assert!((again - a.best_defect).abs() <= 1e-12);
            assert!(a.evaluations_used <= task.budget);
            let f = real_input(&a.witness, "f").unwrap();
            assert!(f.iter().all(|v| v.abs() <= 1.0));
            if objective == Objective::StrongLeibniz {
                assert!(f.iter().all(|v| v.abs() >= task.strong_floor));
            }
        }
    }

    #[test]
    fn nc_search_runs() {
        let task = SearchTask::new(Objective::NcProduct, 2, Exponent::TWO).with_budget(400).with_seed(1);
        let r = maximize_defect(&task).unwrap();
        assert!(r.best_defect <= 1e-9);
        assert!(r.exact_check.is_none());
        let again = recompute_defect(Objective::NcProduct, task.p, &r.witness).unwrap();
        assert!((again - r.best_defect).abs() <= 1e-12);
        let nontracial = task.clone().with_state(StateFamily::Nontracial);
        assert_eq!(maximize_defect(&nontracial).unwrap(), maximize_defect(&nontracial).unwrap());
    }

    #[test]
    fn invalid_tasks() {
        assert!(maximize_defect(&SearchTask::new(Objective::Leibniz, 0, Exponent::ONE)).is_err());
        assert!(maximize_defect(&SearchTask::new(Objective::Leibniz, 3, Exponent::ONE).with_budget(0)).is_err());
        let tiny = maximize_defect(&SearchTask::new(Objective::Leibniz, 3, Exponent::ONE).with_budget(5)).unwrap();
        assert!(tiny.budget_exhausted);
    }

    #[test]
    fn proved_domains() {
        let task = |o, n, p: f64| SearchTask::new(o, n, Exponent::new(p).unwrap());
        assert!(task(Objective::Leibniz, 7, 2.0).is_proved());
        assert!(task(Objective::StrongLeibniz, 7, f64::INFINITY).is_proved());
        assert!(!task(Objective::Leibniz, 7, 1.5).is_proved());
        assert!(task(Objective::StrongLeibniz, 4, 1.5).is_proved());
        assert!(!task(Objective::StrongLeibniz, 4, 1.5).with_measure(MeasureFamily::SimplexRandom).is_proved());
        assert!(task(Objective::Auxiliary, 4, 1.0).is_proved());
        assert!(!task(Objective::Auxiliary, 4, 1.0).with_measure(MeasureFamily::SimplexRandom).is_proved());
        assert!(task(Objective::Auxiliary, 2, 1.0).with_measure(MeasureFamily::SimplexRandom).is_proved());
        assert!(!task(Objective::Auxiliary, 5, 1.0).is_proved());
        assert!(task(Objective::NcProduct, 3, 2.0).with_state(StateFamily::Tracial).is_proved());
        assert!(!task(Objective::NcProduct, 3, 2.0).with_state(StateFamily::Nontracial).is_proved());
    }

    #[test]
    fn small_scan() {
        let table = conjecture_scan(&[3, 5], &[Exponent::ONE], 2000, 1, SCAN_TOLERANCE).unwrap();
        assert_eq!(table.cells.len(), 6);
        assert_eq!(table.leibniz_flags().count(), 0);
        let aux5 = table.cells.iter().find(|c| c.n == 5 && c.objective == Objective::Auxiliary).unwrap();
        assert!(aux5.flagged && aux5.exact_confirmed == Some(true));
        assert!(!aux5.proved);
        assert_eq!(table.proved_flags().count(), 0);
        let aux3 = table.cells.iter().find(|c| c.n == 3 && c.objective == Objective::Auxiliary).unwrap();
        assert!(aux3.proved && !aux3.flagged);
        assert!(table.to_csv().starts_with("n,p,objective,best_defect,flagged\n3,1,leibniz,"));
    }
}

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};

use crate::measure::RandomVariable;

/// Default violation threshold for floating-point defects.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Violated,
}

/// Formats a float so that it parses back to the same value.
pub fn format_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format_f64(z.re)
    } else {
        format!("{}{}{}i", format_f64(z.re), if z.im < 0.0 { "-" } else { "+" }, format_f64(z.im.abs()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Data {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
    Matrix(DMatrix<Complex64>),
    Flag(bool),
}

impl Data {
    pub fn from_variable(f: &RandomVariable) -> Self {
        if f.is_real() {
            Data::Real(f.values().iter().map(|v| v.re).collect())
        } else {
            Data::Complex(f.values().to_vec())
        }
    }
}

struct Row<'a>(&'a DMatrix<Complex64>, usize);

impl Serialize for Row<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.0.ncols()))?;
        for j in 0..self.0.ncols() {
            seq.serialize_element(&format_complex(self.0[(self.1, j)]))?;
        }
        seq.end()
    }
}

impl Serialize for Data {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Data::Real(v) => s.collect_seq(v.iter().map(|x| format_f64(*x))),
            Data::Complex(v) => s.collect_seq(v.iter().map(|z| format_complex(*z))),
            Data::Matrix(m) => s.collect_seq((0..m.nrows()).map(|i| Row(m, i))),
            Data::Flag(b) => s.serialize_bool(*b),
        }
    }
}

/// Named inputs of one inequality evaluation, serialized as a JSON object
/// whose numbers are decimal strings.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Instance {
    entries: Vec<(String, Data)>,
}

impl Instance {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, data: Data) -> Self {
        self.entries.push((name.to_string(), data));
        self
    }

    pub fn with_weights(self, weights: &[f64]) -> Self {
        self.with("weights", Data::Real(weights.to_vec()))
    }

    pub fn with_variable(self, name: &str, f: &RandomVariable) -> Self {
        self.with(name, Data::from_variable(f))
    }

    pub fn get(&self, name: &str) -> Option<&Data> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, d)| d)
    }

    pub fn entries(&self) -> &[(String, Data)] {
        &self.entries
    }
}

impl Serialize for Instance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.entries.len()))?;
        for (name, data) in &self.entries {
            map.serialize_entry(name, data)?;
        }
        map.end()
    }
}

/// One evaluation of an inequality `lhs <= rhs`. The defect is `lhs - rhs`;
/// the inequality is violated on this instance iff the defect exceeds the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub inputs: Instance,
}

impl DefectReport {
    pub fn new(lhs: f64, rhs: f64, inputs: Instance) -> Self {
        let defect = lhs - rhs;
        Self { lhs, rhs, defect, verdict: verdict(defect, DEFAULT_TOLERANCE), tolerance: DEFAULT_TOLERANCE, inputs }
    }

    /// Re-judges the report at another tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.verdict = verdict(self.defect, tolerance);
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

fn verdict(defect: f64, tolerance: f64) -> Verdict {
    // NaN defects count as violations.
    if defect <= tolerance {
        Verdict::Holds
    } else {
        Verdict::Violated
    }
}

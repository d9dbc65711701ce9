//! Flag sets and the `key = value` config file that mirrors them.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer};

/// Every key a config file may contain.
const KNOWN_KEYS: &[&str] = &[
    "n",
    "p",
    "trials",
    "budget",
    "seed",
    "tol",
    "exact",
    "out",
    "d",
    "state",
    "objective",
    "measure",
    "restarts",
    "samples",
    "records",
    "report",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default)]
pub struct OutputFlags {
    /// Report format.
    #[arg(long, value_enum)]
    pub out: Option<OutFormat>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default)]
pub struct ReproduceFlags {
    /// Number of atoms (example1 only, at least 5) [default: 5]
    #[arg(long)]
    pub n: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default)]
pub struct VerifyFlags {
    /// Random instances per check [default: 10000]
    #[arg(long)]
    pub trials: Option<usize>,
    /// [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest defect accepted as numerical noise [default: 1e-9]
    #[arg(long)]
    pub tol: Option<f64>,
    /// Add exact rational checks where supported.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub exact: Option<bool>,
    /// Objective evaluations for numeric operator norms [default: 20000]
    #[arg(long)]
    pub budget: Option<usize>,
    /// Unit-vector samples per derivation check [default: 16]
    #[arg(long)]
    pub samples: Option<usize>,
    /// Keep per-instance records of the matrix suite.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", value_name = "BOOL")]
    pub records: Option<bool>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default)]
pub struct ScanFlags {
    /// Atom counts: a value or an inclusive range a..b [default: 1..8]
    #[arg(long)]
    #[serde(deserialize_with = "text")]
    pub n: Option<String>,
    /// Comma-separated exponents; "inf" allowed [default: 1,1.5,2,3]
    #[arg(long)]
    #[serde(deserialize_with = "text")]
    pub p: Option<String>,
    /// Objective evaluations per cell [default: 20000]
    #[arg(long)]
    pub budget: Option<usize>,
    /// [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defects above this are flagged [default: 1e-9]
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputFlags,
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(default)]
pub struct SearchFlags {
    /// leibniz, strong_leibniz, auxiliary or nc_product
    #[arg(long)]
    pub objective: Option<String>,
    /// Number of atoms [default: 5]
    #[arg(long)]
    pub n: Option<usize>,
    /// Exponent; "inf" allowed [default: 1]
    #[arg(long)]
    #[serde(deserialize_with = "text")]
    pub p: Option<String>,
    /// Matrix dimension for nc_product [default: 3]
    #[arg(long)]
    pub d: Option<usize>,
    /// tracial, nontracial, or a comma-separated spectrum [default: tracial]
    #[arg(long)]
    #[serde(deserialize_with = "text")]
    pub state: Option<String>,
    /// uniform, simplex, or comma-separated weights [default: uniform]
    #[arg(long)]
    #[serde(deserialize_with = "text")]
    pub measure: Option<String>,
    /// Objective evaluations in total [default: 20000]
    #[arg(long)]
    pub budget: Option<usize>,
    /// [default: 1]
    #[arg(long)]
    pub seed: Option<u64>,
    /// [default: 20]
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Defects above this are flagged [default: 1e-9]
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub output: OutputFlags,
}

/// Fills unset fields of `self` from `file`.
pub trait Merge {
    fn merge(self, file: Self) -> Self;
}

macro_rules! merge_fields {
    ($ty:ty { $($field:ident),* } $(, $nested:ident)?) => {
        impl Merge for $ty {
            fn merge(self, file: Self) -> Self {
                Self {
                    $($field: self.$field.or(file.$field),)*
                    $($nested: self.$nested.merge(file.$nested),)?
                }
            }
        }
    };
}

merge_fields!(OutputFlags { out, report });
merge_fields!(ReproduceFlags { n }, output);
merge_fields!(VerifyFlags { trials, seed, tol, exact, budget, samples, records }, output);
merge_fields!(ScanFlags { n, p, budget, seed, tol }, output);
merge_fields!(SearchFlags { objective, n, p, d, state, measure, budget, seed, restarts, tol }, output);

/// Reads a config file; keys irrelevant to the running command are ignored,
/// unknown keys are rejected.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let table: toml::Table = text.parse().map_err(|e| format!("{}: {e}", path.display()))?;
    if let Some(key) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
        return Err(format!("{}: unknown key `{key}`", path.display()));
    }
    T::deserialize(table).map_err(|e| format!("{}: {e}", path.display()))
}

/// Accepts a string, a number or an array of those, rendered as flag text.
fn text<'de, D: Deserializer<'de>>(d: D) -> Result<Option<String>, D::Error> {
    fn render(v: &toml::Value) -> Result<String, String> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) if f.is_infinite() && *f > 0.0 => Ok("inf".into()),
            toml::Value::Float(f) => Ok(f.to_string()),
            toml::Value::Array(items) => Ok(items.iter().map(render).collect::<Result<Vec<_>, _>>()?.join(",")),
            other => Err(format!("unexpected value {other}")),
        }
    }
    Option::<toml::Value>::deserialize(d)?.map(|v| render(&v)).transpose().map_err(serde::de::Error::custom)
}

/// Parses `a` or the inclusive range `a..b`.
pub fn parse_range(s: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("invalid --n `{s}`: expected a value or a range a..b");
    match s.split_once("..") {
        Some((a, b)) => {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            Ok((a..=b).collect())
        }
        None => Ok(vec![s.trim().parse().map_err(|_| bad())?]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("5..8").unwrap(), vec![5, 6, 7, 8]);
        assert_eq!(parse_range("3").unwrap(), vec![3]);
        assert_eq!(parse_range("2..=3").unwrap(), vec![2, 3]);
        assert!(parse_range("8..5").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn file_values_fill_unset_flags() {
        let table: toml::Table = "p = [1, 1.5, inf]\nn = \"5..6\"\nseed = 4\nout = \"csv\"".parse().unwrap();
        let file = ScanFlags::deserialize(table).unwrap();
        assert_eq!(file.p.as_deref(), Some("1,1.5,inf"));
        let cli = ScanFlags { seed: Some(9), ..Default::default() };
        let merged = cli.merge(file);
        assert_eq!(merged.seed, Some(9));
        assert_eq!(merged.n.as_deref(), Some("5..6"));
        assert_eq!(merged.output.out, Some(OutFormat::Csv));
    }
}

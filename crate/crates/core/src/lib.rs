//! Centered moments of bounded random variables on finite probability spaces
//! and matrix algebras, defect functionals for Leibniz-type inequalities, and
//! a counterexample search over bounded instances.

pub mod error;
pub mod exact;
pub mod inequalities;
pub mod measure;
pub mod ncalg;
pub mod projections;
pub mod report;
pub mod sampling;
pub mod search;
pub mod structure;
pub mod suites;

pub use error::{Error, Result};
pub use measure::{
    centered_moment, expectation, p_norm, sup_norm, DiscreteMeasure, Exponent, RandomVariable, ScalarField,
};
pub use report::{Data, DefectReport, Instance, Verdict, DEFAULT_TOLERANCE};
pub use search::{
    conjecture_scan, maximize_defect, reproduce_example1, reproduce_example2, MeasureFamily, Objective, ScanTable,
    SearchResult, SearchTask, StateFamily,
};
pub use suites::{run_suite, Suite, SuiteConfig, SuiteReport};

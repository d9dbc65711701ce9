use leibniz_core::exact::{self, rational, ExactMeasure};
use leibniz_core::inequalities::{leibniz_defect, real, strong_leibniz_defect};
use leibniz_core::search::recompute_defect;
use leibniz_core::{
    centered_moment, maximize_defect, reproduce_example1, reproduce_example2, run_suite, DiscreteMeasure, Exponent,
    Objective, SearchTask, Suite, SuiteConfig,
};
use proptest::prelude::*;

fn reduced(num: i64, den: i64) -> String {
    exact::format_rational(&rational(num, den))
}

#[test]
fn example1_closed_forms() {
    for n in 5..=12i64 {
        let r = reproduce_example1(n as usize).unwrap();
        assert_eq!(r.sigma_f, reduced(2, n));
        assert_eq!(r.lhs, reduced(4 * n - 8, n * n));
        assert_eq!(r.ratio, reduced(2 * n - 4, n));
        assert!(r.matches_closed_form);
    }
    assert!(reproduce_example1(4).is_err());
}

#[test]
fn example2_values() {
    let r = reproduce_example2().unwrap();
    assert_eq!((r.lhs.as_str(), r.rhs.as_str()), ("3/8", "1/4"));
    assert_eq!(r.vector, ["1/2", "-1/4", "-1/1"]);
}

/// On eight uniform atoms the inverse inequality fails at p = 1.
#[test]
fn inverse_inequality_fails_on_eight_atoms() {
    let mut f = vec![rational(1, 1)];
    f.extend(std::iter::repeat_n(rational(-1, 1), 6));
    f.push(rational(-5, 2));
    let mu = ExactMeasure::uniform(8).unwrap();
    let check = exact::strong_leibniz_defect(&f, &mu, Exponent::ONE).unwrap();
    assert_eq!(check.sign, 1);
    assert_eq!(check.defect.as_deref(), Some("1/320"));
    let floats: Vec<f64> = f.iter().map(exact::to_f64).collect();
    let report = strong_leibniz_defect(&real(&floats), &DiscreteMeasure::uniform(8).unwrap(), Exponent::ONE).unwrap();
    assert!((report.lhs - 39.0 / 80.0).abs() < 1e-15);
    assert!((report.rhs - 31.0 / 64.0).abs() < 1e-15);
    // the same vector satisfies the inequality for p = 2
    let sigma2 = exact::strong_leibniz_defect(&f, &mu, Exponent::TWO).unwrap();
    assert!(sigma2.sign < 0);
}

#[test]
fn search_witnesses_recompute() {
    for objective in [Objective::Leibniz, Objective::StrongLeibniz, Objective::Auxiliary] {
        let task = SearchTask::new(objective, 6, Exponent::ONE).with_budget(3000).with_seed(11);
        let result = maximize_defect(&task).unwrap();
        let again = recompute_defect(objective, Exponent::ONE, &result.witness).unwrap();
        assert_eq!(again, result.best_defect);
    }
}

#[test]
fn suites_pass_at_small_scale() {
    let config = SuiteConfig { budget: 2000, ..SuiteConfig::new(200, 3) };
    for suite in Suite::ALL {
        let report = run_suite(suite, &config).unwrap();
        assert!(report.passed, "{suite} failed: {:?}", report.checks.iter().find(|c| !c.passed));
    }
}

proptest! {
    #[test]
    fn sigma_is_translation_invariant_and_homogeneous(
        values in prop::collection::vec(-1.0f64..1.0, 1..8),
        c in -2.0f64..2.0,
        s in -3.0f64..3.0,
    ) {
        let mu = DiscreteMeasure::uniform(values.len()).unwrap();
        for p in [Exponent::ONE, Exponent::new(1.5).unwrap(), Exponent::Infinity] {
            let base = centered_moment(&real(&values), &mu, p).unwrap();
            let shifted: Vec<f64> = values.iter().map(|v| v + c).collect();
            let scaled: Vec<f64> = values.iter().map(|v| v * s).collect();
            prop_assert!((centered_moment(&real(&shifted), &mu, p).unwrap() - base).abs() <= 1e-12);
            prop_assert!((centered_moment(&real(&scaled), &mu, p).unwrap() - s.abs() * base).abs() <= 1e-12);
        }
    }

    #[test]
    fn leibniz_holds_for_the_standard_deviation(
        pairs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, 0.01f64..1.0), 1..9),
    ) {
        let f: Vec<f64> = pairs.iter().map(|t| t.0).collect();
        let g: Vec<f64> = pairs.iter().map(|t| t.1).collect();
        let masses: Vec<f64> = pairs.iter().map(|t| t.2).collect();
        let mu = DiscreteMeasure::from_masses(&masses).unwrap();
        prop_assert!(leibniz_defect(&real(&f), &real(&g), &mu, Exponent::TWO).unwrap().holds());
    }
}

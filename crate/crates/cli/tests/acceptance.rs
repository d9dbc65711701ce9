//! End-to-end acceptance run of the `leibniz` binary. Prints one PASS/FAIL
//! line per criterion and exits nonzero if any criterion fails.

use std::process::Command;
use std::time::{Duration, Instant};

use leibniz_core::exact::{format_rational, rational, to_f64, Rational};
use serde_json::Value;

const TOL: f64 = 1e-9;
const PROJECTION_TOL: f64 = 1e-6;
const MAJORIZATION_TOL: f64 = 1e-12;
const COMMUTATOR_TOL: f64 = 1e-8;

struct Run {
    code: i32,
    stdout: Vec<u8>,
    elapsed: Duration,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_slice(&self.stdout).expect("JSON report")
    }
}

fn leibniz(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_leibniz")).args(args).output().expect("binary runs");
    Run { code: out.status.code().unwrap_or(-1), stdout: out.stdout, elapsed: start.elapsed() }
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn text<'a>(v: &'a Value, key: &str) -> &'a str {
    v[key].as_str().unwrap_or_default()
}

fn checks(report: &Value) -> Vec<Value> {
    report["report"]["checks"].as_array().cloned().unwrap_or_default()
}

fn find<'a>(checks: &'a [Value], name: &str) -> Result<&'a Value, String> {
    checks.iter().find(|c| c["name"] == name).ok_or(format!("missing check `{name}`"))
}

/// The named check ran at least `instances` times with this tolerance and no defect above it.
fn check_within(checks: &[Value], name: &str, instances: u64, tolerance: f64) -> Result<(), String> {
    let c = find(checks, name)?;
    let ran = c["instances"].as_u64().unwrap_or(0);
    let max = c["max_defect"].as_f64().unwrap_or(f64::NAN);
    ensure(ran >= instances, format!("{name}: {ran} instances"))?;
    ensure(c["tolerance"].as_f64() == Some(tolerance), format!("{name}: tolerance {}", c["tolerance"]))?;
    ensure(max <= tolerance, format!("{name}: max defect {max:e}"))?;
    ensure(c["passed"] == true, format!("{name}: not passed"))
}

fn verify(args: &[&str]) -> Result<(Run, Vec<Value>), String> {
    let mut full = vec!["verify"];
    full.extend_from_slice(args);
    let run = leibniz(&full);
    ensure(run.code == 0, format!("`{}` exited {}", full.join(" "), run.code))?;
    let report = run.json();
    ensure(report["schema"] == 1, "schema field")?;
    let list = checks(&report);
    Ok((run, list))
}

fn criterion1() -> Outcome {
    let mut slowest = Duration::ZERO;
    for n in 5..=8i64 {
        let run = leibniz(&["reproduce", "example1", "--n", &n.to_string()]);
        ensure(run.code == 0, format!("n={n}: exit {}", run.code))?;
        let r = &run.json()["report"];
        let expect = |num: i64, den: i64| format_rational(&rational(num, den));
        ensure(text(r, "sigma_f") == expect(2, n), format!("n={n}: sigma {}", r["sigma_f"]))?;
        ensure(text(r, "lhs") == expect(4 * n - 8, n * n), format!("n={n}: lhs {}", r["lhs"]))?;
        ensure(text(r, "ratio") == expect(2 * n - 4, n), format!("n={n}: ratio {}", r["ratio"]))?;
        ensure(run.elapsed < Duration::from_secs(1), format!("n={n}: took {:?}", run.elapsed))?;
        slowest = slowest.max(run.elapsed);
    }
    Ok(format!("n=5..8 exact, slowest {slowest:.2?}"))
}

fn criterion2() -> Outcome {
    let run = leibniz(&["reproduce", "example2"]);
    ensure(run.code == 0, format!("exit {}", run.code))?;
    let r = &run.json()["report"];
    ensure(text(r, "lhs") == "3/8" && text(r, "rhs") == "1/4", format!("lhs {} rhs {}", r["lhs"], r["rhs"]))?;
    let vector: Vec<Rational> =
        r["vector"].as_array().into_iter().flatten().filter_map(|v| v.as_str()?.parse().ok()).collect();
    ensure(vector == [rational(1, 2), rational(-1, 4), rational(-1, 1)], format!("vector {}", r["vector"]))?;
    ensure(run.elapsed < Duration::from_secs(1), format!("took {:?}", run.elapsed))?;
    Ok(format!("lhs 3/8, rhs 1/4, vector (1/2, -1/4, -1) in {:.2?}", run.elapsed))
}

fn criterion3() -> Outcome {
    let (run, list) = verify(&["scalar", "--trials", "100000", "--seed", "7"])?;
    let mut names: Vec<String> = Vec::new();
    for n in 1..=4 {
        for p in ["1", "1.5", "2", "3"] {
            names.push(format!("auxiliary uniform n={n} p={p}"));
        }
    }
    for name in [
        "auxiliary two-atom",
        "leibniz sup-norm real",
        "strong leibniz sup-norm real",
        "leibniz sigma2",
        "strong leibniz sigma2",
        "square corollary",
        "monotone corollary",
    ] {
        names.push(name.to_string());
    }
    for name in &names {
        check_within(&list, name, 100_000, TOL)?;
    }
    Ok(format!("{} cells x 1e5 instances within 1e-9 in {:.1?}", names.len(), run.elapsed))
}

fn criterion4() -> Outcome {
    let (run, list) = verify(&["projections"])?;
    check_within(&list, "numeric operator norm matches exact", 30, PROJECTION_TOL)?;
    check_within(&list, "franchetti at p=2 equals one", 1, TOL)?;
    check_within(&list, "franchetti conjugate symmetry", 7, TOL)?;
    check_within(&list, "franchetti below interpolation bound", 7, TOL)?;
    let table = run.json()["report"]["projection_table"].as_array().cloned().unwrap_or_default();
    ensure(table.iter().all(|row| row["printed_bound"].is_number()), "printed bound column missing")?;
    let two = table.iter().find(|row| row["p"] == "2").ok_or("no p=2 row")?;
    ensure((two["franchetti"].as_f64().unwrap_or(f64::NAN) - 1.0).abs() <= TOL, "franchetti(2) in table")?;
    // independent values of ||I - P|| on lambda_n
    for row in &table {
        let p = row["p"].as_str().unwrap_or_default();
        for cell in row["uniform_n_values"].as_array().into_iter().flatten() {
            let n = cell[0].as_f64().unwrap_or(0.0);
            let v = cell[1].as_f64().unwrap_or(f64::NAN);
            let expected = match p {
                "1" | "inf" => 2.0 - 2.0 / n,
                "2" => 1.0,
                _ => continue,
            };
            ensure((v - expected).abs() <= PROJECTION_TOL, format!("p={p} n={n}: {v}"))?;
        }
    }
    Ok(format!("norms within 1e-6, franchetti checks within 1e-9, {} table rows", table.len()))
}

fn criterion5() -> Outcome {
    let (run, list) = verify(&["majorization", "--trials", "10000"])?;
    for n in 2..=8 {
        check_within(&list, &format!("majorization n={n}"), 10_000, MAJORIZATION_TOL)?;
        check_within(&list, &format!("aligned leibniz n={n}"), 10_000, TOL)?;
    }
    Ok(format!("1e4 aligned pairs per n=2..8 in {:.1?}", run.elapsed))
}

fn criterion6() -> Outcome {
    let (_, list) = verify(&["reduction", "--trials", "1000"])?;
    check_within(&list, "replication preserves expectation and sup norm", 1000, 0.0)?;
    check_within(&list, "replication preserves sigma p=1 exactly", 1000, 0.0)?;
    check_within(&list, "replication preserves sigma p=2 exactly", 1000, 0.0)?;
    check_within(&list, "replication preserves sigma p=1.5", 1000, MAJORIZATION_TOL)?;
    check_within(&list, "replication preserves sigma p=3", 1000, MAJORIZATION_TOL)?;
    check_within(&list, "replication is multiplicative", 1000, 0.0)?;
    Ok("1e3 rational measures: exact for E, sup, sigma_1, sigma_2, products; 1e-12 for p=1.5, 3".into())
}

fn criterion7() -> Outcome {
    let (run, list) = verify(&["nc", "--trials", "1000", "--seed", "7"])?;
    for d in 2..=4 {
        check_within(&list, &format!("commutator norm d={d}"), 1000, COMMUTATOR_TOL)?;
        check_within(&list, &format!("lemma d={d}"), 1000, TOL)?;
        check_within(&list, &format!("module bound d={d}"), 1000, TOL)?;
        let inverse = find(&list, &format!("inverse inequality d={d}"))?;
        let total = inverse["instances"].as_u64().unwrap_or(0) + inverse["skipped"].as_u64().unwrap_or(0);
        ensure(total == 1000, format!("inverse d={d}: {total} draws"))?;
        check_within(&list, &format!("inverse inequality d={d}"), 1, TOL)?;
        check_within(&list, &format!("tracial product leibniz d={d}"), 1000, TOL)?;
        check_within(&list, &format!("derivation norm d={d}"), 1000, TOL)?;
    }
    Ok(format!("d=2..4 x 1e3 instances in {:.1?}", run.elapsed))
}

fn criterion8() -> Outcome {
    let run = leibniz(&["scan", "--n", "5..10", "--p", "1,1.5,3", "--budget", "20000"]);
    ensure(run.code == 0 || run.code == 2, format!("exit {}", run.code))?;
    let report = run.json();
    let cells = report["report"]["cells"].as_array().cloned().unwrap_or_default();
    ensure(cells.len() == 6 * 3 * 3, format!("{} cells", cells.len()))?;
    let threshold = rational(2, 25);
    for c in &cells {
        if c["flagged"] == true && c["p"] == "1" {
            ensure(c["exact_confirmed"] == true, format!("flag at n={} without exact witness", c["n"]))?;
        }
        if c["objective"] == "auxiliary" && c["p"] == "1" {
            let best = c["best_defect"].as_f64().unwrap_or(f64::NAN);
            ensure(c["flagged"] == true, format!("auxiliary n={} not flagged", c["n"]))?;
            ensure(best >= 0.08 - TOL, format!("auxiliary n={}: {best}", c["n"]))?;
            let exact: Option<Rational> = c["result"]["exact_check"]["defect"].as_str().and_then(|s| s.parse().ok());
            ensure(exact.is_some_and(|d| d >= threshold), format!("auxiliary n={}: exact defect below 2/25", c["n"]))?;
        }
    }
    let flagged: Vec<String> = cells
        .iter()
        .filter(|c| c["objective"] != "auxiliary" && c["flagged"] == true)
        .map(|c| {
            let exact = text(&c["result"]["exact_check"], "defect").parse::<Rational>().map(|d| to_f64(&d));
            let shown = exact.map_or("not certified".to_string(), |d| format!("exact defect {d:.6}"));
            format!("{} n={} p={} ({shown})", text(c, "objective"), c["n"], text(c, "p"))
        })
        .collect();
    ensure(
        flagged.is_empty(),
        format!("Leibniz-type cells flagged with exactly certified witnesses: {}", flagged.join(", ")),
    )?;
    Ok("no Leibniz flags; auxiliary column flags n=5..10 at p=1 with exact defect >= 2/25".into())
}

fn criterion9() -> Outcome {
    let commands: [&[&str]; 4] = [
        &["reproduce", "example1", "--n", "7"],
        &["verify", "nc", "--trials", "300", "--seed", "5"],
        &["scan", "--n", "4..6", "--p", "1,inf", "--budget", "3000", "--seed", "9"],
        &["search", "--objective", "nc_product", "--d", "3", "--state", "nontracial", "--budget", "3000"],
    ];
    for args in commands {
        for out in ["json", "csv"] {
            let mut full = args.to_vec();
            full.extend(["--out", out]);
            let a = leibniz(&full);
            let b = leibniz(&full);
            ensure(a.code == b.code && a.stdout == b.stdout, format!("`{}` differs between runs", full.join(" ")))?;
        }
    }
    Ok("reproduce, verify, scan and search reports are byte-identical across runs".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("example 1 exactness", criterion1),
        ("example 2 exactness", criterion2),
        ("proved scalar suite", criterion3),
        ("projection norms", criterion4),
        ("majorization", criterion5),
        ("reduction", criterion6),
        ("noncommutative suite", criterion7),
        ("open-conjecture scan", criterion8),
        ("determinism", criterion9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}

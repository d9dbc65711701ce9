mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use leibniz_core::search::ScanTable;
use leibniz_core::{
    conjecture_scan, maximize_defect, reproduce_example1, reproduce_example2, run_suite, DiscreteMeasure, Exponent,
    MeasureFamily, Objective, SearchTask, StateFamily, Suite, SuiteConfig, DEFAULT_TOLERANCE,
};
use serde::Serialize;

use config::{parse_range, Merge, OutFormat, ReproduceFlags, ScanFlags, SearchFlags, VerifyFlags};

const EXIT_USAGE: u8 = 1;
const EXIT_FLAGGED: u8 = 2;

const CSV_HELP: &str = "\
CSV columns:
  verify     check,asserted,instances,skipped,tolerance,max_defect,violations,passed
  scan       n,p,objective,best_defect,flagged
  search     objective,n,p,seed,best_defect,evaluations_used,budget_exhausted,exact_sign
  reproduce  quantity,value

Exit status: 0 when every proved inequality holds, 2 when one is flagged or a
reproduction does not match, 1 on usage errors.";

#[derive(Parser)]
#[command(name = "leibniz", version, about = "Leibniz-type inequalities for centered moments", after_help = CSV_HELP)]
struct Cli {
    /// Read flag values from a `key = value` file; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recompute a closed-form counterexample in exact arithmetic.
    Reproduce {
        #[arg(value_enum)]
        which: Example,
        #[command(flatten)]
        flags: ReproduceFlags,
    },
    /// Run a verification suite over the proved inequalities.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[command(flatten)]
        flags: VerifyFlags,
    },
    /// Search every (n, p) cell for violations of the open inequalities.
    Scan {
        #[command(flatten)]
        flags: ScanFlags,
    },
    /// Maximize one defect functional.
    Search {
        #[command(flatten)]
        flags: SearchFlags,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    Example1,
    Example2,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Scalar,
    Projections,
    Majorization,
    Reduction,
    Nc,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Scalar => Suite::Scalar,
            SuiteArg::Projections => Suite::Projections,
            SuiteArg::Majorization => Suite::Majorization,
            SuiteArg::Reduction => Suite::Reduction,
            SuiteArg::Nc => Suite::Nc,
        }
    }
}

/// Failure of a command before a report exists.
struct Usage(String);

impl From<leibniz_core::Error> for Usage {
    fn from(e: leibniz_core::Error) -> Self {
        Usage(e.to_string())
    }
}

impl From<String> for Usage {
    fn from(s: String) -> Self {
        Usage(s)
    }
}

/// A rendered report and whether it carries a flagged proved inequality.
struct Outcome {
    text: String,
    flagged: bool,
    summary: String,
}

fn with_file<T: Merge + for<'de> serde::Deserialize<'de>>(flags: T, config: &Option<PathBuf>) -> Result<T, Usage> {
    match config {
        Some(path) => Ok(flags.merge(config::load(path)?)),
        None => Ok(flags),
    }
}

fn parse_exponents(s: &str) -> Result<Vec<Exponent>, Usage> {
    s.split(',').map(|p| p.parse::<Exponent>().map_err(Usage::from)).collect()
}

fn reproduce(which: Example, flags: ReproduceFlags) -> Result<Outcome, Usage> {
    let format = flags.output.out.unwrap_or(OutFormat::Json);
    match which {
        Example::Example1 => {
            let report = reproduce_example1(flags.n.unwrap_or(5))?;
            let summary = format!(
                "example1 n={}: lhs {} rhs {} ratio {} ({})",
                report.n,
                report.lhs,
                report.rhs,
                report.ratio,
                if report.matches_closed_form { "matches" } else { "MISMATCH" }
            );
            Ok(Outcome {
                text: render::document("reproduce", &report, format, render::quantities)?,
                flagged: !report.matches_closed_form,
                summary,
            })
        }
        Example::Example2 => {
            if flags.n.is_some() {
                return Err(Usage("--n applies to example1 only".into()));
            }
            let report = reproduce_example2()?;
            let summary = format!(
                "example2: lhs {} rhs {} ({})",
                report.lhs,
                report.rhs,
                if report.matches_closed_form { "matches" } else { "MISMATCH" }
            );
            Ok(Outcome {
                text: render::document("reproduce", &report, format, render::quantities)?,
                flagged: !report.matches_closed_form,
                summary,
            })
        }
    }
}

fn verify(suite: Suite, flags: VerifyFlags) -> Result<Outcome, Usage> {
    let mut config = SuiteConfig::new(flags.trials.unwrap_or(10_000), flags.seed.unwrap_or(1));
    config.tolerance = flags.tol.unwrap_or(DEFAULT_TOLERANCE);
    config.exact = flags.exact.unwrap_or(false);
    config.budget = flags.budget.unwrap_or(config.budget);
    config.samples = flags.samples.unwrap_or(config.samples);
    config.record_instances = flags.records.unwrap_or(false);
    if config.trials == 0 {
        return Err(Usage("--trials must be positive".into()));
    }
    if !(config.tolerance >= 0.0) {
        return Err(Usage("--tol must be nonnegative".into()));
    }
    if config.record_instances && suite != Suite::Nc {
        return Err(Usage("--records applies to the nc suite only".into()));
    }
    let report = run_suite(suite, &config)?;
    let failing: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let summary = if failing.is_empty() {
        format!("verify {suite}: {} checks passed", report.checks.len())
    } else {
        format!("verify {suite}: FLAGGED {}", failing.join("; "))
    };
    let format = flags.output.out.unwrap_or(OutFormat::Json);
    Ok(Outcome {
        text: render::document("verify", &report, format, render::suite_csv)?,
        flagged: !report.passed,
        summary,
    })
}

fn scan(flags: ScanFlags) -> Result<Outcome, Usage> {
    let ns = parse_range(flags.n.as_deref().unwrap_or("1..8"))?;
    let ps = parse_exponents(flags.p.as_deref().unwrap_or("1,1.5,2,3"))?;
    let budget = flags.budget.unwrap_or(20_000);
    let tol = flags.tol.unwrap_or(DEFAULT_TOLERANCE);
    if ns.contains(&0) {
        return Err(Usage("--n must be at least 1".into()));
    }
    if !(tol >= 0.0) {
        return Err(Usage("--tol must be nonnegative".into()));
    }
    let table = conjecture_scan(&ns, &ps, budget, flags.seed.unwrap_or(1), tol)?;
    let proved: Vec<String> = table.proved_flags().map(cell_label).collect();
    let open: Vec<String> = table.cells.iter().filter(|c| c.flagged && !c.proved).map(cell_label).collect();
    let mut summary = format!("scan: {} cells", table.cells.len());
    if !open.is_empty() {
        summary.push_str(&format!("; violations of unproved inequalities at {}", open.join(", ")));
    }
    if !proved.is_empty() {
        summary.push_str(&format!("; FLAGGED proved cells {}", proved.join(", ")));
    }
    let format = flags.output.out.unwrap_or(OutFormat::Json);
    Ok(Outcome {
        text: render::document("scan", &table, format, ScanTable::to_csv)?,
        flagged: !proved.is_empty(),
        summary,
    })
}

fn cell_label(c: &leibniz_core::search::ScanCell) -> String {
    format!("{} n={} p={} ({:.6})", c.objective, c.n, c.p, c.best_defect)
}

fn parse_measure(s: &str, n: usize) -> Result<MeasureFamily, Usage> {
    match s {
        "uniform" => Ok(MeasureFamily::Uniform),
        "simplex" => Ok(MeasureFamily::SimplexRandom),
        list => {
            let masses = list
                .split(',')
                .map(|w| w.trim().parse::<f64>().map_err(|_| Usage(format!("invalid --measure `{list}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            if masses.len() != n {
                return Err(Usage(format!("--measure has {} weights but n = {n}", masses.len())));
            }
            Ok(MeasureFamily::Fixed(DiscreteMeasure::new(masses)?))
        }
    }
}

#[derive(Serialize)]
struct SearchReport {
    proved: bool,
    tolerance: f64,
    flagged: bool,
    result: leibniz_core::SearchResult,
}

fn search(flags: SearchFlags) -> Result<Outcome, Usage> {
    let objective: Objective =
        flags.objective.as_deref().ok_or_else(|| Usage("--objective is required".into()))?.parse()?;
    let matrix = objective == Objective::NcProduct;
    if matrix && (flags.n.is_some() || flags.measure.is_some()) {
        return Err(Usage("nc_product takes --d and --state, not --n or --measure".into()));
    }
    if !matrix && (flags.d.is_some() || flags.state.is_some()) {
        return Err(Usage("--d and --state apply to nc_product only".into()));
    }
    let n = if matrix { flags.d.unwrap_or(3) } else { flags.n.unwrap_or(5) };
    let p: Exponent = flags.p.as_deref().unwrap_or("1").parse()?;
    let mut task = SearchTask::new(objective, n, p)
        .with_budget(flags.budget.unwrap_or(20_000))
        .with_seed(flags.seed.unwrap_or(1))
        .with_measure(parse_measure(flags.measure.as_deref().unwrap_or("uniform"), n)?);
    if let Some(state) = &flags.state {
        task = task.with_state(state.parse::<StateFamily>()?);
    }
    if let Some(r) = flags.restarts {
        task.restarts = r;
    }
    task.validate()?;
    let tolerance = flags.tol.unwrap_or(DEFAULT_TOLERANCE);
    if !(tolerance >= 0.0) {
        return Err(Usage("--tol must be nonnegative".into()));
    }
    let result = maximize_defect(&task)?;
    let exceeded = result.best_defect > tolerance;
    let refuted = result.exact_check.as_ref().is_some_and(|e| e.sign <= 0);
    let proved = task.is_proved();
    let flagged = proved && exceeded && !refuted;
    let mut summary = format!("search {objective} n={n} p={p}: best defect {:?}", result.best_defect);
    if exceeded && !proved {
        summary.push_str("; violation of an unproved inequality");
    }
    if flagged {
        summary.push_str("; FLAGGED proved inequality");
    }
    let report = SearchReport { proved, tolerance, flagged, result };
    let format = flags.output.out.unwrap_or(OutFormat::Json);
    Ok(Outcome { text: render::document("search", &report, format, search_csv)?, flagged, summary })
}

fn search_csv(report: &SearchReport) -> String {
    let r = &report.result;
    let sign = r.exact_check.as_ref().map_or(String::new(), |e| e.sign.to_string());
    format!(
        "objective,n,p,seed,best_defect,evaluations_used,budget_exhausted,exact_sign\n{},{},{},{},{:?},{},{},{}\n",
        r.objective, r.n, r.p, r.seed, r.best_defect, r.evaluations_used, r.budget_exhausted, sign
    )
}

fn output_of(command: &Command) -> Option<PathBuf> {
    match command {
        Command::Reproduce { flags, .. } => flags.output.report.clone(),
        Command::Verify { flags, .. } => flags.output.report.clone(),
        Command::Scan { flags } => flags.output.report.clone(),
        Command::Search { flags } => flags.output.report.clone(),
    }
}

fn execute(cli: Cli) -> Result<Outcome, Usage> {
    let config = cli.config;
    let command = match cli.command {
        Command::Reproduce { which, flags } => Command::Reproduce { which, flags: with_file(flags, &config)? },
        Command::Verify { suite, flags } => Command::Verify { suite, flags: with_file(flags, &config)? },
        Command::Scan { flags } => Command::Scan { flags: with_file(flags, &config)? },
        Command::Search { flags } => Command::Search { flags: with_file(flags, &config)? },
    };
    let target = output_of(&command);
    let outcome = match command {
        Command::Reproduce { which, flags } => reproduce(which, flags),
        Command::Verify { suite, flags } => verify(suite.into(), flags),
        Command::Scan { flags } => scan(flags),
        Command::Search { flags } => search(flags),
    }?;
    match &target {
        Some(path) => {
            std::fs::write(path, &outcome.text).map_err(|e| Usage(format!("cannot write {}: {e}", path.display())))?
        }
        None => print!("{}", outcome.text),
    }
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(outcome) => {
            eprintln!("{}", outcome.summary);
            if outcome.flagged {
                ExitCode::from(EXIT_FLAGGED)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

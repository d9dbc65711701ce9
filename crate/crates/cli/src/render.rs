//! Report serialization. JSON reports are wrapped in a versioned envelope.

use leibniz_core::SuiteReport;
use serde::Serialize;
use serde_json::Value;

use crate::config::OutFormat;

pub const SCHEMA: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    command: &'a str,
    report: &'a T,
}

pub fn document<T: Serialize>(
    command: &str,
    report: &T,
    format: OutFormat,
    csv: impl Fn(&T) -> String,
) -> Result<String, String> {
    match format {
        OutFormat::Json => {
            let envelope = Envelope { schema: SCHEMA, command, report };
            let mut text = serde_json::to_string_pretty(&envelope).map_err(|e| e.to_string())?;
            text.push('\n');
            Ok(text)
        }
        OutFormat::Csv => Ok(csv(report)),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

/// One `quantity,value` row per top-level field; vectors are space-separated.
pub fn quantities<T: Serialize>(report: &T) -> String {
    let mut out = String::from("quantity,value\n");
    if let Ok(Value::Object(fields)) = serde_json::to_value(report) {
        for (k, v) in &fields {
            out.push_str(&format!("{k},{}\n", cell(v)));
        }
    }
    out
}

pub fn suite_csv(report: &SuiteReport) -> String {
    let mut out = String::from("check,asserted,instances,skipped,tolerance,max_defect,violations,passed\n");
    for c in &report.checks {
        out.push_str(&format!(
            "{},{},{},{},{:?},{:?},{},{}\n",
            c.name, c.asserted, c.instances, c.skipped, c.tolerance, c.max_defect, c.violations, c.passed
        ));
    }
    out
}

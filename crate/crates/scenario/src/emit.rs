//! CSV and JSON output.

use cvfaraday::{ProtocolResult, SweepTable};
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// `%.17g`: 17 significant digits, trailing zeros dropped, exponent form
/// outside `1e-5 ≤ |v| < 1e17`.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (16 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn csv_row<'a>(cells: impl Iterator<Item = &'a str>) -> String {
    cells.collect::<Vec<_>>().join(",")
}

fn quadrature_labels(result: &ProtocolResult<f64>) -> Vec<String> {
    result
        .final_state
        .modes()
        .iter()
        .flat_map(|m| [format!("x_{}", m.id), format!("p_{}", m.id)])
        .collect()
}

/// Header of report names and one row of values; with `with_state`, a blank
/// line, the covariance matrix with labelled rows, and the displacement.
pub fn result_csv(result: &ProtocolResult<f64>, with_state: bool) -> String {
    let mut out = String::new();
    if !result.reports.is_empty() {
        out += &csv_row(result.reports.names());
        out.push('\n');
        let values: Vec<String> = result.reports.iter().map(|(_, v)| format_number(v)).collect();
        out += &csv_row(values.iter().map(String::as_str));
        out.push('\n');
    }
    if with_state {
        if !out.is_empty() {
            out.push('\n');
        }
        let labels = quadrature_labels(result);
        out += &format!("row,{}\n", labels.join(","));
        let cov = result.final_state.cov();
        for (i, label) in labels.iter().enumerate() {
            let row: Vec<String> = cov.row(i).iter().map(|&v| format_number(v)).collect();
            out += &format!("{label},{}\n", row.join(","));
        }
        let disp: Vec<String> = result.final_state.disp().iter().map(|&v| format_number(v)).collect();
        out += &format!("disp,{}\n", disp.join(","));
    }
    out
}

pub fn result_json(result: &ProtocolResult<f64>) -> Value {
    let s = &result.final_state;
    let cov: Vec<Vec<f64>> = (0..s.dim()).map(|i| s.cov().row(i).iter().copied().collect()).collect();
    let reports: Map<String, Value> = result
        .reports
        .iter()
        .map(|(k, v)| (k.to_string(), json!(v)))
        .collect();
    json!({
        "modes": s.modes().iter().map(|m| json!({"id": m.id, "kind": m.kind.as_str()})).collect::<Vec<_>>(),
        "cov": cov,
        "disp": s.disp().iter().copied().collect::<Vec<_>>(),
        "records": result.records.iter().map(|r| json!({
            "mode": r.measured_mode.id,
            "quadrature": r.quadrature.to_string(),
            "outcome": r.outcome,
            "step": r.step_index,
        })).collect::<Vec<_>>(),
        "reports": reports,
    })
}

pub fn table_csv(table: &SweepTable<f64>) -> String {
    let mut out = csv_row(table.columns.iter().map(String::as_str));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
        out += &csv_row(cells.iter().map(String::as_str));
        out.push('\n');
    }
    out
}

pub fn table_json(table: &SweepTable<f64>) -> Value {
    json!({ "columns": table.columns, "rows": table.rows })
}

pub fn emit_result(result: &ProtocolResult<f64>, format: Format, with_state: bool) -> String {
    match format {
        Format::Csv => result_csv(result, with_state),
        Format::Json => format!("{}\n", result_json(result)),
    }
}

pub fn emit_table(table: &SweepTable<f64>, format: Format) -> String {
    match format {
        Format::Csv => table_csv(table),
        Format::Json => format!("{}\n", table_json(table)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_number(4.0 / 3.0), "1.3333333333333333");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(0.1), "0.10000000000000001");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(1e-7), "9.9999999999999995e-08");
        assert_eq!(format_number(1e20), "1e+20");
        assert_eq!(format_number(123456.0), "123456");
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn round_trips_through_text() {
        for v in [1.0 / 3.0, 2f64.sqrt(), 1e-300, 6.02e23, -7.25e-6, 0.29222] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
    }
}

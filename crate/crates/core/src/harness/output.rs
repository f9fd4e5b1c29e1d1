//! Tidy CSV tables and run records.
//!
//! Each table file starts with its sweep axes, followed by the columns of
//! every engine that ran, in the order `lti`, `fixed`, `mc`:
//!
//! * `lti_default`, `lti_stress` (random-skeleton mapping)
//! * `fixed_default`, `fixed_stress` (fixed-skeleton mapping)
//! * `mc_mean_default`, `mc_p10_default`, `mc_p90_default`,
//!   `mc_mean_stress`, `mc_p10_stress`, `mc_p90_stress`
//!
//! All values are fractions of banks. Tables restricted to one measure keep
//! only its columns. A cell is empty when the engine skipped that point.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::Engine;
use super::experiments::{knife_edge, ExperimentResults, Measure, Row, Skipped, Table};
use super::HarnessError;
use crate::cascade_mc::write_trials_csv;

fn fmt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn engine_columns(engine: Engine, measure: Measure) -> Vec<&'static str> {
    let cols: &[(&str, bool)] = match engine {
        Engine::Lti => &[("lti_default", true), ("lti_stress", false)],
        Engine::Fixed => &[("fixed_default", true), ("fixed_stress", false)],
        Engine::Mc => &[
            ("mc_mean_default", true),
            ("mc_p10_default", true),
            ("mc_p90_default", true),
            ("mc_mean_stress", false),
            ("mc_p10_stress", false),
            ("mc_p90_stress", false),
        ],
    };
    cols.iter()
        .filter(|(_, is_default)| match measure {
            Measure::Both => true,
            Measure::Default => *is_default,
            Measure::Stress => !*is_default,
        })
        .map(|(name, _)| *name)
        .collect()
}

fn value(row: &Row, column: &str) -> Option<f64> {
    match column {
        "lti_default" => row.lti.map(|f| f.default),
        "lti_stress" => row.lti.map(|f| f.stress),
        "fixed_default" => row.fixed.map(|f| f.default),
        "fixed_stress" => row.fixed.map(|f| f.stress),
        "mc_mean_default" => row.mc.map(|m| m.mean_default),
        "mc_p10_default" => row.mc.map(|m| m.p10_default),
        "mc_p90_default" => row.mc.map(|m| m.p90_default),
        "mc_mean_stress" => row.mc.map(|m| m.mean_stress),
        "mc_p10_stress" => row.mc.map(|m| m.p10_stress),
        "mc_p90_stress" => row.mc.map(|m| m.p90_stress),
        _ => None,
    }
}

/// Column names of a table.
pub fn columns(table: &Table) -> Vec<String> {
    let mut cols: Vec<String> = table.axes.clone();
    for &e in &table.engines {
        cols.extend(engine_columns(e, table.measure).into_iter().map(String::from));
    }
    cols
}

/// Writes one table as CSV.
pub fn write_table<W: Write>(table: &Table, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    let cols = columns(table);
    w.write_record(&cols).map_err(csv_err)?;
    for row in &table.rows {
        let mut rec: Vec<String> = row.coords.iter().map(|x| x.to_string()).collect();
        rec.extend(cols[table.axes.len()..].iter().map(|c| fmt(value(row, c))));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Io(std::io::Error::other(e))
}

/// One CSV per figure analog in `dir`, named after the table.
pub fn emit_plot_data(results: &ExperimentResults, dir: &Path) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    for table in &results.tables {
        write_table(table, fs::File::create(dir.join(format!("{}.csv", table.name)))?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TableSummary<'a> {
    name: &'a str,
    rows: usize,
    /// Sweep index `i` such that the largest jump of the analytic default
    /// fraction lies between points `i` and `i + 1`.
    knife_edge: Option<usize>,
    unconverged: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    experiment: &'a str,
    tables: Vec<TableSummary<'a>>,
    skipped: &'a [Skipped],
}

/// Table files, per-trial Monte Carlo files, `config.json` with the full
/// effective configuration and `summary.json`.
pub fn write_results(results: &ExperimentResults, dir: &Path) -> Result<(), HarnessError> {
    emit_plot_data(results, dir)?;
    let to_io = |e: serde_json::Error| HarnessError::Io(std::io::Error::other(e));
    let mut config = serde_json::to_string_pretty(&results.config).map_err(to_io)?;
    config.push('\n');
    fs::write(dir.join("config.json"), config)?;
    for (name, aggs) in &results.mc {
        write_trials_csv(aggs, fs::File::create(dir.join(format!("{name}_mc_trials.csv")))?)?;
    }
    let tables = results
        .tables
        .iter()
        .map(|t| {
            let defaults: Vec<f64> = t.rows.iter().filter_map(|r| r.analytic().map(|f| f.default)).collect();
            TableSummary {
                name: &t.name,
                rows: t.rows.len(),
                knife_edge: if t.axes.len() == 1 { knife_edge(&defaults) } else { None },
                unconverged: t.rows.iter().filter(|r| r.analytic().is_some_and(|f| !f.converged)).count(),
            }
        })
        .collect();
    let summary = Summary { experiment: results.config.experiment.name(), tables, skipped: &results.skipped };
    let mut text = serde_json::to_string_pretty(&summary).map_err(to_io)?;
    text.push('\n');
    fs::write(dir.join("summary.json"), text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::experiments::Fractions;

    fn table(rows: Vec<Row>, engines: Vec<Engine>) -> Table {
        Table { name: "fig3".into(), axes: vec!["lambda".into()], measure: Measure::Both, engines, rows }
    }

    #[test]
    fn empty_sweep_writes_header_only() {
        let mut buf = Vec::new();
        write_table(&table(vec![], vec![Engine::Lti, Engine::Mc]), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "lambda,lti_default,lti_stress,mc_mean_default,mc_p10_default,mc_p90_default,mc_mean_stress,mc_p10_stress,mc_p90_stress\n"
        );
    }

    #[test]
    fn analytic_only_has_no_mc_columns() {
        let f = Fractions { default: 0.25, stress: 0.5, iterations: 3, converged: true };
        let row = Row { coords: vec![0.5], lti: Some(f), fixed: None, mc: None };
        let mut buf = Vec::new();
        write_table(&table(vec![row], vec![Engine::Lti]), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "lambda,lti_default,lti_stress\n0.5,0.25,0.5\n");
    }

    #[test]
    fn measure_filters_columns() {
        let mut t = table(vec![], vec![Engine::Fixed, Engine::Mc]);
        t.measure = Measure::Stress;
        assert_eq!(columns(&t), vec!["lambda", "fixed_stress", "mc_mean_stress", "mc_p10_stress", "mc_p90_stress"]);
    }
}

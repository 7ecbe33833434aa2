//! Result tables, their CSV and JSON files, and the figure layouts.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::budget::{ErrorBudget, Mechanism, SweepRow};
use crate::error::{Error, Result};
use crate::optimizer::{SweepPoint, SweepVariable};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => String::new(),
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) | Cell::Empty => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
        }
    }
}

/// Shortest round-trip text; exponent form outside `[1e-3, 1e7)`.
fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-3..1e7).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// A named table; one CSV file (and optionally one JSON file) each.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width of table {}",
            self.name
        );
        self.rows.push(row);
    }

    pub fn to_csv(&self, header: &str) -> String {
        let mut s = String::from(header);
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::csv).collect();
            s.push_str(&line.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self, meta: &Value) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let m: Map<String, Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(r.iter().map(Cell::json))
                    .collect();
                Value::Object(m)
            })
            .collect();
        json!({ "meta": meta, "columns": self.columns, "rows": rows })
    }
}

/// Marker line before the resolved configuration in every header.
pub const CONFIG_MARKER: &str = "# resolved config:";

/// `#`-prefixed header: tool version, timestamp and the resolved config.
pub fn header(config_toml: &str, timestamp: u64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# rydcz {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "# generated_unix_s = {timestamp}");
    let _ = writeln!(s, "{CONFIG_MARKER}");
    for line in config_toml.lines() {
        if line.is_empty() {
            s.push_str("#\n");
        } else {
            let _ = writeln!(s, "# {line}");
        }
    }
    s
}

/// The configuration text embedded in a header written by [`header`].
pub fn config_from_header(text: &str) -> Option<String> {
    let mut lines = text.lines().skip_while(|l| *l != CONFIG_MARKER);
    lines.next()?;
    let mut out = String::new();
    for l in lines.take_while(|l| l.starts_with('#')) {
        out.push_str(l.strip_prefix("# ").unwrap_or(l.trim_start_matches('#')));
        out.push('\n');
    }
    Some(out)
}

/// Writes every table as CSV (and JSON when asked); returns the paths.
pub fn write_tables(
    dir: &Path,
    tables: &[Table],
    config_toml: &str,
    timestamp: u64,
    json: bool,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let head = header(config_toml, timestamp);
    let meta = json!({
        "tool": "rydcz",
        "version": env!("CARGO_PKG_VERSION"),
        "generated_unix_s": timestamp,
        "config": toml::from_str::<toml::Value>(config_toml).map(|v| serde_json::to_value(v).unwrap_or(Value::Null)).unwrap_or(Value::Null),
    });
    let mut paths = Vec::new();
    for t in tables {
        let p = dir.join(format!("{}.csv", t.name));
        std::fs::write(&p, t.to_csv(&head))?;
        paths.push(p);
        if json {
            let p = dir.join(format!("{}.json", t.name));
            let text = serde_json::to_string_pretty(&t.to_json(&meta)).expect("json");
            std::fs::write(&p, text + "\n")?;
            paths.push(p);
        }
    }
    Ok(paths)
}

/// Result sets the figure layouts are built from.
pub enum FigureData<'a> {
    Sweep {
        variable: SweepVariable,
        points: &'a [SweepPoint],
    },
    Scan {
        mechanism: Mechanism,
        rows: &'a [SweepRow],
    },
    Budget(&'a ErrorBudget),
}

use super::config::Figure;

/// Plot-ready table of `figure` from a matching result set.
///
/// | figure | columns |
/// |---|---|
/// | fig2d | `V_over_Omega0, feasible, tau_Omega0, mean_rydberg_time_Omega0, pair_time_Omega0, gate_error` |
/// | fig3 | `width_Omega0, feasible, tau_Omega0, rydberg_time_01/10/11_Omega0, mean_rydberg_time_Omega0, gate_error` |
/// | fig4 | `kappa_Omega0, feasible, tau_Omega0, rydberg_time_01/10/11_Omega0, mean_rydberg_time_Omega0` |
/// | fig5a | `gamma_per_s, gamma_times_50us, numeric_infidelity, analytic_infidelity, converged` |
/// | fig5b | `trap_z_over_2pi_kHz, temperature_uK, numeric_infidelity, analytic_infidelity, converged` |
/// | fig5c | `trap_x_over_2pi_kHz, temperature_uK, numeric_infidelity, analytic_infidelity, converged` |
pub fn emit_figure_data(data: &FigureData<'_>, figure: Figure) -> Result<Table> {
    let mismatch = || Error::Schema(format!("result set does not match {}", figure.name()));
    let empty = || Error::Schema(format!("no results for {}", figure.name()));
    match (figure, data) {
        (Figure::Fig2d | Figure::Fig3 | Figure::Fig4, FigureData::Sweep { variable, points }) => {
            let expected = match figure {
                Figure::Fig2d => SweepVariable::Interaction,
                Figure::Fig3 => SweepVariable::Width,
                _ => SweepVariable::Kappa,
            };
            if *variable != expected {
                return Err(mismatch());
            }
            if points.is_empty() {
                return Err(empty());
            }
            let mut t = match figure {
                Figure::Fig2d => Table::new(
                    "fig2d",
                    &[
                        "V_over_Omega0",
                        "feasible",
                        "tau_Omega0",
                        "mean_rydberg_time_Omega0",
                        "pair_time_Omega0",
                        "gate_error",
                    ],
                ),
                Figure::Fig3 => Table::new(
                    "fig3",
                    &[
                        "width_Omega0",
                        "feasible",
                        "tau_Omega0",
                        "rydberg_time_01_Omega0",
                        "rydberg_time_10_Omega0",
                        "rydberg_time_11_Omega0",
                        "mean_rydberg_time_Omega0",
                        "gate_error",
                    ],
                ),
                _ => Table::new(
                    "fig4",
                    &[
                        "kappa_Omega0",
                        "feasible",
                        "tau_Omega0",
                        "rydberg_time_01_Omega0",
                        "rydberg_time_10_Omega0",
                        "rydberg_time_11_Omega0",
                        "mean_rydberg_time_Omega0",
                    ],
                ),
            };
            for p in points.iter() {
                let r = p.result.as_ref();
                let tr = |k: usize| Cell::from(r.map(|r| r.gate.rydberg_time[k]));
                let mean = Cell::from(r.map(|r| r.gate.mean_rydberg_time));
                let tau = Cell::from(r.map(|r| r.tau()));
                let err = Cell::from(r.map(|r| r.gate_error));
                let row = match figure {
                    Figure::Fig2d => vec![
                        p.value.into(),
                        p.feasible.into(),
                        tau,
                        mean,
                        r.map(|r| r.gate.pair_time).into(),
                        err,
                    ],
                    Figure::Fig3 => vec![
                        p.value.into(),
                        p.feasible.into(),
                        tau,
                        tr(1),
                        tr(2),
                        tr(3),
                        mean,
                        err,
                    ],
                    _ => vec![
                        p.value.into(),
                        p.feasible.into(),
                        tau,
                        tr(1),
                        tr(2),
                        tr(3),
                        mean,
                    ],
                };
                t.push(row);
            }
            Ok(t)
        }
        (Figure::Fig5a | Figure::Fig5b | Figure::Fig5c, FigureData::Scan { mechanism, rows }) => {
            let expected = match figure {
                Figure::Fig5a => Mechanism::Decay,
                Figure::Fig5b => Mechanism::Recoil,
                _ => Mechanism::Vdw,
            };
            if *mechanism != expected {
                return Err(mismatch());
            }
            if rows.is_empty() {
                return Err(empty());
            }
            let mut t = match figure {
                Figure::Fig5a => Table::new(
                    "fig5a",
                    &[
                        "gamma_per_s",
                        "gamma_times_50us",
                        "numeric_infidelity",
                        "analytic_infidelity",
                        "converged",
                    ],
                ),
                Figure::Fig5b => Table::new(
                    "fig5b",
                    &[
                        "trap_z_over_2pi_kHz",
                        "temperature_uK",
                        "numeric_infidelity",
                        "analytic_infidelity",
                        "converged",
                    ],
                ),
                _ => Table::new(
                    "fig5c",
                    &[
                        "trap_x_over_2pi_kHz",
                        "temperature_uK",
                        "numeric_infidelity",
                        "analytic_infidelity",
                        "converged",
                    ],
                ),
            };
            for r in rows.iter() {
                let row = match figure {
                    Figure::Fig5a => vec![
                        r.value.into(),
                        (r.value * 50e-6).into(),
                        r.numeric.into(),
                        r.analytic.into(),
                        r.converged.into(),
                    ],
                    _ => vec![
                        (r.value * 1e-3).into(),
                        (r.temperature_k * 1e6).into(),
                        r.numeric.into(),
                        r.analytic.into(),
                        r.converged.into(),
                    ],
                };
                t.push(row);
            }
            Ok(t)
        }
        _ => Err(mismatch()),
    }
}

/// Budget table with both metrics per entry and temperature.
pub fn budget_table(b: &ErrorBudget) -> Result<Table> {
    if b.rows.is_empty() {
        return Err(Error::Schema("empty budget".into()));
    }
    let mut t = Table::new(
        "budget",
        &[
            "entry",
            "temperature_uK",
            "bell_infidelity",
            "avg_infidelity",
            "analytic_bell_infidelity",
            "converged",
        ],
    );
    for r in &b.rows {
        t.push(vec![
            r.entry.as_str().into(),
            (r.temperature_k * 1e6).into(),
            r.bell_infidelity.into(),
            r.avg_infidelity.into(),
            r.analytic.into(),
            r.converged.into(),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quoting_and_nan() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![Cell::Num(f64::NAN), "x,y".into()]);
        assert!(t.to_csv("").ends_with("a,b\n,\"x,y\"\n"));
    }

    #[test]
    fn header_round_trip() {
        let cfg = "mode = \"simulate\"\n\n[system]\nV_over_Omega0 = 21.1\n";
        let h = header(cfg, 0);
        assert!(h.lines().all(|l| l.starts_with('#')));
        let back = config_from_header(&format!("{h}a,b\n1,2\n")).unwrap();
        assert_eq!(
            toml::from_str::<toml::Value>(&back).unwrap(),
            toml::from_str::<toml::Value>(cfg).unwrap()
        );
    }

    #[test]
    fn empty_figure_is_error() {
        let data = FigureData::Sweep {
            variable: SweepVariable::Kappa,
            points: &[],
        };
        assert!(matches!(
            emit_figure_data(&data, Figure::Fig4),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            emit_figure_data(&data, Figure::Fig3),
            Err(Error::Schema(_))
        ));
    }
}

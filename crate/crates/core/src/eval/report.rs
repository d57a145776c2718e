use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{MetricsReport, Summary};
use crate::error::Result;
use crate::model::{Architecture, ArchitectureSpec, Representation};

pub const MISSING_CELL: &str = "—";

const HEADERS: [&str; 5] = ["Text Representation Method", "Model", "Accuracy", "Precision", "Recall"];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TableStyle {
    pub decimal_comma: bool,
}

/// One rendered table row; `None` cells are shown as [`MISSING_CELL`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableRow {
    pub representation: String,
    pub model: String,
    pub accuracy: String,
    pub precision: String,
    pub recall: String,
}

/// Reports keyed by representation and model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportTable {
    cells: BTreeMap<(Representation, Architecture), MetricsReport>,
}

impl ReportTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, spec: ArchitectureSpec, report: MetricsReport) {
        self.cells.insert((spec.representation, spec.kind), report);
    }

    pub fn get(&self, spec: ArchitectureSpec) -> Option<&MetricsReport> {
        self.cells.get(&(spec.representation, spec.kind))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Representations with at least one report, BERT first.
    pub fn groups(&self) -> Vec<Representation> {
        Representation::ALL
            .into_iter()
            .filter(|r| self.cells.keys().any(|(rep, _)| rep == r))
            .collect()
    }

    /// Every model row of every present group in report order.
    pub fn rows(&self, style: TableStyle) -> Vec<TableRow> {
        let mut out = Vec::new();
        for rep in self.groups() {
            for arch in Architecture::ALL {
                let cell = self.cells.get(&(rep, arch));
                let fmt = |pick: fn(&MetricsReport) -> Summary| {
                    cell.map_or_else(|| MISSING_CELL.to_string(), |c| pick(c).format(style.decimal_comma))
                };
                out.push(TableRow {
                    representation: rep.label().to_string(),
                    model: arch.label().to_string(),
                    accuracy: fmt(|c| c.accuracy),
                    precision: fmt(|c| c.precision),
                    recall: fmt(|c| c.recall),
                });
            }
        }
        out
    }

    /// Plain-text table with one heading line per representation group.
    pub fn render_text(&self, style: TableStyle) -> String {
        let rows = self.rows(style);
        let width = |i: usize, pick: fn(&TableRow) -> &str| {
            rows.iter()
                .map(|r| pick(r).chars().count())
                .chain([HEADERS[i].chars().count()])
                .max()
                .unwrap_or(0)
        };
        let w = [
            width(0, |_| ""),
            width(1, |r| &r.model),
            width(2, |r| &r.accuracy),
            width(3, |r| &r.precision),
            width(4, |r| &r.recall),
        ];
        let pad = |s: &str, n: usize| format!("{s}{}", " ".repeat(n.saturating_sub(s.chars().count())));
        let line = |cells: [&str; 5]| {
            cells
                .iter()
                .zip(w)
                .map(|(c, n)| pad(c, n))
                .collect::<Vec<_>>()
                .join(" | ")
                .trim_end()
                .to_string()
        };
        let mut out = String::new();
        let _ = writeln!(out, "{}", line(HEADERS));
        let rule: Vec<String> = w.iter().map(|&n| "-".repeat(n)).collect();
        let _ = writeln!(out, "{}", rule.join("-|-"));
        let mut current = String::new();
        for r in &rows {
            if r.representation != current {
                current = r.representation.clone();
                let _ = writeln!(out, "{current}");
            }
            let _ = writeln!(out, "{}", line(["", &r.model, &r.accuracy, &r.precision, &r.recall]));
        }
        out
    }

    /// CSV with the same cells as the text table, one row per model.
    pub fn render_csv(&self, style: TableStyle) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(HEADERS)?;
        for r in self.rows(style) {
            w.write_record([&r.representation, &r.model, &r.accuracy, &r.precision, &r.recall])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| crate::error::Error::Numeric(format!("csv buffer: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv of utf-8 cells is utf-8"))
    }
}

/// Parses a CSV table written by [`ReportTable::render_csv`].
pub fn parse_table_csv(text: &str) -> Result<Vec<TableRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let get = |i: usize| rec.get(i).unwrap_or_default().to_string();
        out.push(TableRow {
            representation: get(0),
            model: get(1),
            accuracy: get(2),
            precision: get(3),
            recall: get(4),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{aggregate, RunMetrics};

    fn full_table() -> ReportTable {
        let mut t = ReportTable::new();
        for (i, spec) in ArchitectureSpec::all().into_iter().enumerate() {
            let a = 0.80 + i as f64 * 0.005;
            let rep = aggregate(&[RunMetrics::new(a, 0.9, 0.7), RunMetrics::new(a + 0.01, 0.91, 0.72)]).unwrap();
            t.insert(spec, rep);
        }
        t
    }

    #[test]
    fn fourteen_rows_two_groups() {
        let t = full_table();
        let rows = t.rows(TableStyle::default());
        assert_eq!(rows.len(), 14);
        let order: Vec<&str> = rows[..7].iter().map(|r| r.model.as_str()).collect();
        assert_eq!(order, ["CNN-LSTM", "LSTM-CNN", "CNN-GRU", "GRU-CNN", "CNN", "LSTM", "GRU"]);
        assert_eq!(rows[0].representation, "BERT");
        assert_eq!(rows[7].representation, "Embedding");

        let text = t.render_text(TableStyle::default());
        // header, rule, 2 group lines, 14 rows
        assert_eq!(text.lines().count(), 18);
        assert!(text.lines().any(|l| l == "BERT"));
    }

    #[test]
    fn missing_cells_and_comma_style() {
        let mut t = ReportTable::new();
        let rep = aggregate(&[RunMetrics::new(0.8768, 0.9, 0.8)]).unwrap();
        t.insert(ArchitectureSpec::new(Architecture::LstmCnn, Representation::BertFeatures), rep);
        let rows = t.rows(TableStyle { decimal_comma: true });
        assert_eq!(rows.len(), 7);
        assert_eq!(rows[0].accuracy, MISSING_CELL);
        assert_eq!(rows[1].accuracy, "0,8768 ± 0,0000");
        assert_eq!(rows[1].recall, "0,8000 ± 0,0000");
    }

    #[test]
    fn csv_round_trip() {
        let t = full_table();
        let style = TableStyle { decimal_comma: true };
        let csv = t.render_csv(style).unwrap();
        assert_eq!(parse_table_csv(&csv).unwrap(), t.rows(style));
    }
}

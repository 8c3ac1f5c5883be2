//! Tabular output with fixed column order and round-trip float formatting.

use std::fmt::Write as _;

/// 17 significant digits in scientific notation; parses back to the same bits.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push_floats(&mut self, values: &[f64]) {
        self.push(values.iter().map(|&v| fmt_float(v)).collect());
    }

    /// Appends a row of preformatted cells.
    ///
    /// # Panics
    /// If the row width differs from the header.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// Parses a table written by [`to_csv`](Self::to_csv) (no quoting).
    pub fn parse(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        let columns: Vec<String> = lines.next()?.split(',').map(str::to_string).collect();
        let mut rows = Vec::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != columns.len() {
                return None;
            }
            rows.push(row);
        }
        Some(Self { columns, rows })
    }

    /// Numeric values of a column; non-numeric cells are skipped.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().filter_map(|r| r[i].parse().ok()).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bitwise() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn table_round_trip() {
        let mut t = CsvTable::new(["a", "b"]);
        t.push_floats(&[1.0, 2.0]);
        t.push(vec!["3".into(), "x".into()]);
        let back = CsvTable::parse(&t.to_csv()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.column("a").unwrap(), vec![1.0, 3.0]);
        assert_eq!(back.column("b").unwrap(), vec![2.0]);
    }
}

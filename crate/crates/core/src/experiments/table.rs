use std::fmt::Write as _;

use crate::solvers::trace::format_float;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
    Empty,
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            Cell::Int(i) => Some(i as f64),
            Cell::Float(x) => Some(x),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Float(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn floats(&self, name: &str) -> Option<Vec<Option<f64>>> {
        Some(self.column(name)?.into_iter().map(Cell::as_f64).collect())
    }

    /// Rows whose `name` column renders as `value`.
    pub fn filter(&self, name: &str, value: &Cell) -> Table {
        let i = self.column_index(name).expect("unknown column");
        Table {
            columns: self.columns.clone(),
            rows: self.rows.iter().filter(|r| r[i].render() == value.render()).cloned().collect(),
        }
    }

    /// CSV text, preceded by a `# spec_sha256:` comment line when given.
    pub fn to_csv(&self, spec_hash: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(h) = spec_hash {
            let _ = writeln!(out, "# spec_sha256: {h}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::render).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    /// Mean, median, min and max of each `values` column per distinct
    /// combination of `group_by` columns, in first-appearance order. Empty
    /// cells are skipped.
    pub fn aggregate(&self, group_by: &[&str], values: &[&str]) -> Table {
        let gi: Vec<usize> = group_by.iter().map(|g| self.column_index(g).expect("unknown group column")).collect();
        let vi: Vec<usize> = values.iter().map(|v| self.column_index(v).expect("unknown value column")).collect();
        let mut columns: Vec<String> = group_by.iter().map(|s| s.to_string()).collect();
        columns.push("count".into());
        for v in values {
            for stat in ["mean", "median", "min", "max"] {
                columns.push(format!("{v}_{stat}"));
            }
        }
        let mut keys: Vec<Vec<String>> = Vec::new();
        let mut members: Vec<Vec<usize>> = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            let key: Vec<String> = gi.iter().map(|&i| row[i].render()).collect();
            match keys.iter().position(|k| *k == key) {
                Some(p) => members[p].push(r),
                None => {
                    keys.push(key);
                    members.push(vec![r]);
                }
            }
        }
        let mut out = Table { columns, rows: Vec::new() };
        for rows in &members {
            let first = &self.rows[rows[0]];
            let mut row: Vec<Cell> = gi.iter().map(|&i| first[i].clone()).collect();
            row.push(rows.len().into());
            for &i in &vi {
                let xs: Vec<f64> = rows.iter().filter_map(|&r| self.rows[r][i].as_f64()).collect();
                let s = summary(&xs);
                row.extend(s.map_or_else(|| vec![Cell::Empty; 4], |s| s.into_iter().map(Cell::Float).collect()));
            }
            out.rows.push(row);
        }
        out
    }
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Some(if k % 2 == 1 { v[k / 2] } else { 0.5 * (v[k / 2 - 1] + v[k / 2]) })
}

fn summary(xs: &[f64]) -> Option<[f64; 4]> {
    let med = median(xs)?;
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Some([mean, med, min, max])
}

//! CSV point sets: comma separated, `.` decimals, optional single header row.
//!
//! A header is detected when any field of the first row fails to parse as a
//! number. A column named `weight` (or the name passed as `weight_column`)
//! holds point weights; without one, weights are uniform.

use std::path::Path;

use tjdiv::{Generator, WeightedPointSet};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub path: String,
    pub dimension: usize,
    pub has_weights: bool,
    pub header: Option<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
    /// Raw weights as read, before normalisation.
    pub weights: Option<Vec<f64>>,
    /// 1-based file line of every row.
    pub lines: Vec<u64>,
}

impl DatasetFile {
    pub fn point_set(&self) -> CliResult<WeightedPointSet<f64>> {
        let set = match &self.weights {
            Some(w) => WeightedPointSet::new(self.rows.clone(), w.clone()),
            None => WeightedPointSet::uniform(self.rows.clone()),
        };
        set.map_err(|e| self.error(self.lines.first().copied().unwrap_or(1), e.to_string()))
    }

    fn error(&self, line: u64, message: impl Into<String>) -> CliError {
        CliError::Dataset { path: self.path.clone(), line, message: message.into() }
    }

    /// Checks each row against the generator domain, naming the first bad
    /// line. `interior` excludes boundary points where gradients blow up.
    pub fn check_domain(&self, g: &Generator<f64>, interior: bool) -> CliResult<()> {
        for (row, &line) in self.rows.iter().zip(&self.lines) {
            g.check_point(row, interior).map_err(|e| self.error(line, e.to_string()))?;
        }
        Ok(())
    }
}

pub fn load_dataset(path: &Path, weight_column: Option<&str>) -> CliResult<DatasetFile> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|source| CliError::Io { path: display.clone(), source })?;
    parse_dataset(file, &display, weight_column)
}

pub fn parse_dataset<R: std::io::Read>(reader: R, path: &str, weight_column: Option<&str>) -> CliResult<DatasetFile> {
    let mut csv = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
    let fail = |line: u64, message: String| CliError::Dataset { path: path.to_string(), line, message };
    let mut header = None;
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    let mut width = None;
    for (index, record) in csv.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            fail(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(index as u64 + 1);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if index == 0 && record.iter().any(|f| f.parse::<f64>().is_err()) {
            header = Some(record.iter().map(str::to_string).collect::<Vec<_>>());
            width = Some(record.len());
            continue;
        }
        match width {
            Some(w) if w != record.len() => {
                return Err(fail(line, format!("expected {w} fields, found {}", record.len())));
            }
            None => width = Some(record.len()),
            _ => {}
        }
        let mut values = Vec::with_capacity(record.len());
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| fail(line, format!("column {}: cannot parse `{field}` as a number", col + 1)))?;
            if !v.is_finite() {
                return Err(fail(line, format!("column {}: non-finite value `{field}`", col + 1)));
            }
            values.push(v);
        }
        rows.push(values);
        lines.push(line);
    }
    if rows.is_empty() {
        return Err(fail(1, "no data rows".to_string()));
    }
    let weight_name = weight_column.unwrap_or("weight");
    let weight_index = match &header {
        Some(h) => h.iter().position(|c| c == weight_name),
        None => None,
    };
    if weight_column.is_some() && weight_index.is_none() {
        return Err(fail(1, format!("no column named `{weight_name}`")));
    }
    let weights = match weight_index {
        Some(wi) => {
            let mut w = Vec::with_capacity(rows.len());
            for (row, &line) in rows.iter_mut().zip(&lines) {
                let v = row.remove(wi);
                if v < 0.0 {
                    return Err(fail(line, format!("negative weight {v}")));
                }
                w.push(v);
            }
            if w.iter().sum::<f64>() <= 0.0 {
                return Err(fail(lines[0], "weights sum to zero".to_string()));
            }
            Some(w)
        }
        None => None,
    };
    let dimension = rows[0].len();
    if dimension == 0 {
        return Err(fail(lines[0], "no coordinate columns".to_string()));
    }
    Ok(DatasetFile { path: path.to_string(), dimension, has_weights: weights.is_some(), header, rows, weights, lines })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_weights_without_column() {
        let d = parse_dataset("1,2\n3,4\n5,6\n".as_bytes(), "mem", None).unwrap();
        assert_eq!(d.dimension, 2);
        assert!(!d.has_weights);
        let set = d.point_set().unwrap();
        assert_eq!(set.weights(), &[1.0 / 3.0; 3]);
    }

    #[test]
    fn weight_column_is_normalised() {
        let d = parse_dataset("x,weight\n1,2\n2,1\n3,1\n".as_bytes(), "mem", None).unwrap();
        assert_eq!(d.dimension, 1);
        assert_eq!(d.point_set().unwrap().weights(), &[0.5, 0.25, 0.25]);
        let named = parse_dataset("w,x\n1,1\n3,2\n".as_bytes(), "mem", Some("w")).unwrap();
        assert_eq!(named.rows, vec![vec![1.0], vec![2.0]]);
    }

    #[test]
    fn errors_name_the_line() {
        let e = parse_dataset("1,2\n3,abc\n".as_bytes(), "mem", None).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_dataset("x\n1\nNaN\n".as_bytes(), "mem", None).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = parse_dataset("1,2\n3\n".as_bytes(), "mem", None).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn domain_error_names_row() {
        let d = parse_dataset("1\n0\n2\n".as_bytes(), "mem", None).unwrap();
        let g = Generator::<f64>::shannon(1).unwrap();
        assert!(d.check_domain(&g, false).is_ok());
        let e = d.check_domain(&g, true).unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }
}

//! Observed datasets and CSV interchange.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Column labels for the roles in a [`Dataset`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnNames {
    pub exposure: String,
    pub mediator: String,
    pub outcome: String,
    pub confounders: Vec<String>,
}

impl ColumnNames {
    pub fn default_for(p: usize) -> Self {
        Self {
            exposure: "S".into(),
            mediator: "M".into(),
            outcome: "Y".into(),
            confounders: (1..=p).map(|j| format!("X{j}")).collect(),
        }
    }
}

/// Exposure, mediator, outcome, and an `n × p` confounder matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    exposure: Vec<T>,
    mediator: Vec<T>,
    outcome: Vec<T>,
    confounders: Matrix<T>,
    names: ColumnNames,
}

impl<T: Scalar> Dataset<T> {
    pub fn new(
        exposure: Vec<T>,
        mediator: Vec<T>,
        outcome: Vec<T>,
        confounders: Matrix<T>,
        names: ColumnNames,
    ) -> Result<Self> {
        let n = exposure.len();
        if n == 0 {
            return Err(Error::InsufficientData("dataset has no rows".into()));
        }
        if mediator.len() != n || outcome.len() != n || confounders.rows() != n {
            return Err(Error::InvalidInput(format!(
                "column lengths differ: exposure {n}, mediator {}, outcome {}, confounders {}",
                mediator.len(),
                outcome.len(),
                confounders.rows()
            )));
        }
        if names.confounders.len() != confounders.cols() {
            return Err(Error::InvalidInput(
                "confounder name count does not match matrix width".into(),
            ));
        }
        let all_finite = exposure
            .iter()
            .chain(&mediator)
            .chain(&outcome)
            .chain(confounders.as_slice())
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidInput("dataset contains missing or non-finite values".into()));
        }
        Ok(Self {
            exposure,
            mediator,
            outcome,
            confounders,
            names,
        })
    }

    /// Dataset without confounders and with default column names.
    pub fn without_confounders(exposure: Vec<T>, mediator: Vec<T>, outcome: Vec<T>) -> Result<Self> {
        let n = exposure.len();
        Self::new(exposure, mediator, outcome, Matrix::zeros(n, 0), ColumnNames::default_for(0))
    }

    pub fn n(&self) -> usize {
        self.exposure.len()
    }

    /// Number of confounder columns.
    pub fn p(&self) -> usize {
        self.confounders.cols()
    }

    pub fn exposure(&self) -> &[T] {
        &self.exposure
    }

    pub fn mediator(&self) -> &[T] {
        &self.mediator
    }

    pub fn outcome(&self) -> &[T] {
        &self.outcome
    }

    pub fn confounders(&self) -> &Matrix<T> {
        &self.confounders
    }

    pub fn names(&self) -> &ColumnNames {
        &self.names
    }

    /// Confounder row `i` with a leading 1 for the intercept.
    pub fn confounder_row_with_intercept(&self, i: usize) -> Vec<T> {
        std::iter::once(T::one())
            .chain(self.confounders.row(i).iter().copied())
            .collect()
    }

    /// `[1, W]` design used by the marginal models.
    pub fn marginal_design(&self) -> Matrix<T> {
        self.design_with(&[])
    }

    /// `[1, extra..., W]`.
    pub fn design_with(&self, extra: &[&[T]]) -> Matrix<T> {
        let n = self.n();
        let q = 1 + extra.len() + self.p();
        let mut x = Matrix::zeros(n, q);
        for i in 0..n {
            x[(i, 0)] = T::one();
            for (j, col) in extra.iter().enumerate() {
                x[(i, 1 + j)] = col[i];
            }
            for j in 0..self.p() {
                x[(i, 1 + extra.len() + j)] = self.confounders[(i, j)];
            }
        }
        x
    }

    /// Rows selected by `indices`, with repetition.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let pick = |v: &[T]| indices.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let p = self.p();
        let mut conf = Matrix::zeros(indices.len(), p);
        for (r, &i) in indices.iter().enumerate() {
            for j in 0..p {
                conf[(r, j)] = self.confounders[(i, j)];
            }
        }
        Self {
            exposure: pick(&self.exposure),
            mediator: pick(&self.mediator),
            outcome: pick(&self.outcome),
            confounders: conf,
            names: self.names.clone(),
        }
    }

    /// Writes the dataset as CSV with a header row.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec![
            self.names.exposure.clone(),
            self.names.mediator.clone(),
            self.names.outcome.clone(),
        ];
        header.extend(self.names.confounders.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.n() {
            let mut rec = vec![
                fmt_value(self.exposure[i]),
                fmt_value(self.mediator[i]),
                fmt_value(self.outcome[i]),
            ];
            rec.extend(self.confounders.row(i).iter().map(|&v| fmt_value(v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn from_table(table: &Table, roles: &ColumnRoles) -> Result<Self> {
        let get = |name: &str| -> Result<Vec<T>> {
            Ok(table.column(name)?.iter().map(|&v| T::lit(v)).collect())
        };
        let n = table.n_rows();
        let mut conf = Matrix::zeros(n, roles.confounders.len());
        for (j, name) in roles.confounders.iter().enumerate() {
            for (i, &v) in table.column(name)?.iter().enumerate() {
                conf[(i, j)] = T::lit(v);
            }
        }
        Self::new(
            get(&roles.exposure)?,
            get(&roles.mediator)?,
            get(&roles.outcome)?,
            conf,
            ColumnNames {
                exposure: roles.exposure.clone(),
                mediator: roles.mediator.clone(),
                outcome: roles.outcome.clone(),
                confounders: roles.confounders.clone(),
            },
        )
    }
}

/// Shortest round-trip decimal representation.
pub(crate) fn fmt_value<T: Scalar>(v: T) -> String {
    format!("{}", v)
}

/// Which CSV columns play which role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnRoles {
    pub exposure: String,
    pub mediator: String,
    pub outcome: String,
    pub confounders: Vec<String>,
}

/// Numeric CSV table keyed by header names.
#[derive(Debug, Clone)]
pub struct Table {
    headers: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if headers.is_empty() {
            return Err(Error::InvalidInput("CSV has no header row".into()));
        }
        let mut columns = vec![Vec::new(); headers.len()];
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field.trim().parse().map_err(|_| {
                    Error::InvalidInput(format!(
                        "row {}: column '{}' value '{}' is not a number",
                        line + 2,
                        headers[j],
                        field
                    ))
                })?;
                columns[j].push(v);
            }
        }
        Ok(Self { headers, columns })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn headers(&self) -> &[String] {
        &self.headers
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|j| self.columns[j].as_slice())
            .ok_or_else(|| Error::InvalidInput(format!("column '{name}' not found in CSV header")))
    }
}

/// Observations of the four-node DAG `S → Z → M → Y` (plus direct edges).
#[derive(Debug, Clone, PartialEq)]
pub struct VineDataset<T> {
    pub s: Vec<T>,
    pub z: Vec<T>,
    pub m: Vec<T>,
    pub y: Vec<T>,
}

impl<T: Scalar> VineDataset<T> {
    pub fn new(s: Vec<T>, z: Vec<T>, m: Vec<T>, y: Vec<T>) -> Result<Self> {
        let n = s.len();
        if z.len() != n || m.len() != n || y.len() != n {
            return Err(Error::InvalidInput("four-node columns differ in length".into()));
        }
        if s.iter().chain(&z).chain(&m).chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("dataset contains non-finite values".into()));
        }
        Ok(Self { s, z, m, y })
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn columns(&self) -> [&[T]; 4] {
        [&self.s, &self.z, &self.m, &self.y]
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let pick = |v: &[T]| idx.iter().map(|&i| v[i]).collect::<Vec<_>>();
        Self {
            s: pick(&self.s),
            z: pick(&self.z),
            m: pick(&self.m),
            y: pick(&self.y),
        }
    }

    pub fn from_table(table: &Table, s: &str, z: &str, m: &str, y: &str) -> Result<Self> {
        let get = |name: &str| -> Result<Vec<T>> {
            Ok(table.column(name)?.iter().map(|&v| T::lit(v)).collect())
        };
        Self::new(get(s)?, get(z)?, get(m)?, get(y)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["S", "Z", "M", "Y"])?;
        for i in 0..self.n() {
            w.write_record([
                fmt_value(self.s[i]),
                fmt_value(self.z[i]),
                fmt_value(self.m[i]),
                fmt_value(self.y[i]),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_roles() {
        let conf = Matrix::from_rows(&[vec![0.5], vec![-1.25], vec![2.0]]).unwrap();
        let d = Dataset::new(
            vec![0.0, 1.0, 1.0],
            vec![0.1, 0.2, 0.3],
            vec![1.5, -2.5, 3.0],
            conf,
            ColumnNames::default_for(1),
        )
        .unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("S,M,Y,X1\n"));
        let table = Table::read_csv(buf.as_slice()).unwrap();
        let roles = ColumnRoles {
            exposure: "S".into(),
            mediator: "M".into(),
            outcome: "Y".into(),
            confounders: vec!["X1".into()],
        };
        let back: Dataset<f64> = Dataset::from_table(&table, &roles).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_mismatched_lengths() {
        let r = Dataset::<f64>::without_confounders(vec![1.0, 2.0], vec![1.0], vec![1.0, 2.0]);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
        let r = Dataset::<f64>::without_confounders(vec![1.0], vec![f64::NAN], vec![1.0]);
        assert!(r.is_err());
    }

    #[test]
    fn missing_column_is_reported_by_name() {
        let table = Table::read_csv("a,b\n1,2\n".as_bytes()).unwrap();
        let err = table.column("mediator").unwrap_err();
        assert!(err.to_string().contains("mediator"));
        assert!(Table::read_csv("a,b\n1,x\n".as_bytes()).is_err());
    }

    #[test]
    fn design_layout() {
        let conf = Matrix::from_rows(&[vec![7.0, 8.0], vec![9.0, 10.0]]).unwrap();
        let d = Dataset::new(vec![1.0, 0.0], vec![2.0, 3.0], vec![4.0, 5.0], conf, ColumnNames::default_for(2)).unwrap();
        let x = d.design_with(&[d.exposure()]);
        assert_eq!(x.row(0), &[1.0, 1.0, 7.0, 8.0]);
        assert_eq!(x.row(1), &[1.0, 0.0, 9.0, 10.0]);
        let s = d.select_rows(&[1, 1, 0]);
        assert_eq!(s.mediator(), &[3.0, 3.0, 2.0]);
        assert_eq!(s.confounders().row(2), &[7.0, 8.0]);
    }
}

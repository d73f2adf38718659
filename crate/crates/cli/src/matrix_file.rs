//! On-disk JSON format for complex matrices: row-major `[re, im]` pairs.

use std::fs;
use std::path::Path;

use cfent_core::linalg::{c64, CMatrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMatrix, label: Option<String>) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
            .collect();
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
            label,
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix, CliError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(CliError::Input(format!(
                "fields `rows` and `cols` must be positive, got {} × {}",
                self.rows, self.cols
            )));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(CliError::Input(format!(
                "field `data` holds {} entries, expected rows·cols = {}",
                self.data.len(),
                self.rows * self.cols
            )));
        }
        if let Some(k) = self.data.iter().position(|[re, im]| !re.is_finite() || !im.is_finite()) {
            return Err(CliError::Input(format!("field `data` entry {k} is not finite")));
        }
        Ok(CMatrix::from_row_iterator(
            self.rows,
            self.cols,
            self.data.iter().map(|&[re, im]| c64(re, im)),
        ))
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed matrix file: {e}")))
    }
}

pub fn read_matrix(path: &Path) -> Result<CMatrix, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    MatrixFile::parse(&text)
        .and_then(|f| f.to_matrix())
        .map_err(|e| CliError::Input(format!("{}: {}", path.display(), e.message())))
}

pub fn write_matrix(path: &Path, m: &CMatrix, label: Option<String>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&MatrixFile::from_matrix(m, label)).expect("matrix files serialize");
    fs::write(path, text + "\n").map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_row_major() {
        let m = CMatrix::from_row_slice(2, 3, &[c64(1.0, 0.0), c64(0.0, 2.0), c64(3.0, 0.0), c64(4.0, -1.0), c64(5.0, 0.0), c64(6.0, 0.5)]);
        let f = MatrixFile::from_matrix(&m, Some("x".into()));
        assert_eq!(f.data[1], [0.0, 2.0]);
        assert_eq!(f.data[3], [4.0, -1.0]);
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(MatrixFile::parse(&text).unwrap().to_matrix().unwrap(), m);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let e = MatrixFile::parse(r#"{"rows": 2, "cols": 2}"#).unwrap_err();
        assert!(e.message().contains("data"), "{e}");
        let e = MatrixFile::parse(r#"{"rows": 2, "cols": 2, "data": [[1, 0]]}"#)
            .unwrap()
            .to_matrix()
            .unwrap_err();
        assert!(e.message().contains("`data`"), "{e}");
        let e = MatrixFile::parse(r#"{"rows": 1, "cols": 1, "data": [[1, 0]], "colour": 1}"#).unwrap_err();
        assert!(e.message().contains("colour"), "{e}");
    }
}

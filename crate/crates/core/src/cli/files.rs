//! On-disk JSON formats. Complex numbers are two-element arrays `[re, im]`,
//! matrices are nested row arrays.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::request::Request;
use crate::error::{Error, Result};
use crate::theta::PeriodMatrix;

/// Period matrix as stored on disk: genus plus real and imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodMatrixFile {
    pub g: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

fn to_matrix(g: usize, rows: &[Vec<f64>], what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != g || rows.iter().any(|r| r.len() != g) {
        return Err(Error::InvalidInput(format!("`{what}` must be a {g}x{g} matrix")));
    }
    Ok(DMatrix::from_fn(g, g, |i, j| rows[i][j]))
}

impl TryFrom<PeriodMatrixFile> for PeriodMatrix {
    type Error = Error;

    fn try_from(f: PeriodMatrixFile) -> Result<Self> {
        let re = to_matrix(f.g, &f.re, "re")?;
        let im = to_matrix(f.g, &f.im, "im")?;
        PeriodMatrix::from_parts(&re, &im)
    }
}

impl From<&PeriodMatrix> for PeriodMatrixFile {
    fn from(pm: &PeriodMatrix) -> Self {
        let b = pm.matrix();
        let g = pm.genus();
        PeriodMatrixFile {
            g,
            re: (0..g).map(|i| (0..g).map(|j| b[(i, j)].re).collect()).collect(),
            im: (0..g).map(|i| (0..g).map(|j| b[(i, j)].im).collect()).collect(),
        }
    }
}

impl From<PeriodMatrix> for PeriodMatrixFile {
    fn from(pm: PeriodMatrix) -> Self {
        PeriodMatrixFile::from(&pm)
    }
}

impl PeriodMatrixFile {
    pub fn parse(text: &str) -> Result<PeriodMatrix> {
        let f: PeriodMatrixFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("malformed period matrix file: {e}")))?;
        PeriodMatrix::try_from(f)
    }
}

/// Tolerances a run was made with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol: f64,
    /// Pass/fail threshold for residuals, where one applies.
    pub threshold: Option<f64>,
}

/// Everything needed to reproduce a run: `inputs` holds fully resolved
/// values (sampled matrices and points included), so replaying it does not
/// depend on the generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunReportFile {
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub inputs: Request,
    pub outputs: serde_json::Value,
}

impl RunReportFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("malformed run report: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::sample_siegel;

    #[test]
    fn round_trips_bit_exactly() {
        let pm = sample_siegel(3, 12, 0.3).unwrap();
        let text = serde_json::to_string(&PeriodMatrixFile::from(&pm)).unwrap();
        let back = PeriodMatrixFile::parse(&text).unwrap();
        assert_eq!(back.matrix(), pm.matrix());
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(PeriodMatrixFile::parse("{\"g\": 2, \"re\": [[0,0]], \"im\": [[1,0],[0,1]]}").is_err());
        assert!(PeriodMatrixFile::parse("not json").is_err());
        assert!(PeriodMatrixFile::parse("{\"g\": 1, \"re\": [[0]], \"im\": [[-1]]}").is_err());
    }
}

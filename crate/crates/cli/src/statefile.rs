//! JSON state files: `{"basis": "AB-comp", "re": [[..; 4]; 4], "im": [[..; 4]; 4]}`.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use qfidelity::qmat::{validate_density_with_tol, CMat, DensityMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const BASIS_TAG: &str = "AB-comp";

/// Real and imaginary parts of a complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_cmat(m: &CMat) -> Self {
        let part = |f: fn(&Complex64) -> f64| {
            (0..m.rows())
                .map(|i| (0..m.cols()).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub basis: String,
    pub re: [[f64; 4]; 4],
    pub im: [[f64; 4]; 4],
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        Self {
            basis: BASIS_TAG.to_string(),
            re: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].re)),
            im: std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].im)),
        }
    }

    pub fn matrix(&self) -> CMat {
        CMat::from_fn(4, 4, |i, j| Complex64::new(self.re[i][j], self.im[i][j]))
    }
}

pub fn read_state(path: &Path, tol: f64) -> CliResult<DensityMatrix> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let file: StateFile = serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    if file.basis != BASIS_TAG {
        return Err(CliError::Basis {
            path: path.to_path_buf(),
            tag: file.basis,
        });
    }
    validate_density_with_tol(&file.matrix(), tol).map_err(CliError::Invalid)
}

pub fn write_state(path: &Path, rho: &DensityMatrix) -> CliResult<()> {
    let text = serde_json::to_string_pretty(&StateFile::from_density(rho)).expect("state serializes");
    fs::write(path, text + "\n").map_err(CliError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qfidelity::random::{hilbert_schmidt_state, rng};

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let rho = hilbert_schmidt_state(&mut rng(1), 3).unwrap();
        write_state(&path, &rho).unwrap();
        let back = read_state(&path, 1e-10).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
    }

    #[test]
    fn rejects_bad_basis_and_trace() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let mut file = StateFile::from_density(&DensityMatrix::maximally_mixed());
        file.basis = "BA".into();
        fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        assert!(matches!(read_state(&path, 1e-10), Err(CliError::Basis { .. })));
        file.basis = BASIS_TAG.into();
        file.re[0][0] = 1.25;
        fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
        let err = read_state(&path, 1e-10).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("trace"));
    }
}

use num_complex::Complex64;

use super::{herm_eig, singular_values_2x2, CMat};
use crate::error::{Error, Result};

/// Default tolerance for density-matrix validation.
pub const DENSITY_TOL: f64 = 1e-10;
const LOCAL_OP_TOL: f64 = 1e-12;
const NORM_TOL: f64 = 1e-12;

/// Validated two-qubit state: 4×4, Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(CMat);

impl DensityMatrix {
    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn into_matrix(self) -> CMat {
        self.0
    }

    /// Normalizes a PSD matrix by its trace and validates the result.
    pub fn from_unnormalized(m: &CMat) -> Result<Self> {
        let tr = m.trace().re;
        if !(tr > 0.0) {
            return Err(Error::InvalidTrace(tr));
        }
        validate_density(&m.scale(1.0 / tr).hermitian_part())
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self(CMat::outer(psi.as_slice()))
    }

    pub fn maximally_mixed() -> Self {
        Self(CMat::identity(4).scale(0.25))
    }
}

/// Checks a 4×4 matrix against the density-matrix invariants with the default tolerance.
pub fn validate_density(m: &CMat) -> Result<DensityMatrix> {
    validate_density_with_tol(m, DENSITY_TOL)
}

pub fn validate_density_with_tol(m: &CMat, tol: f64) -> Result<DensityMatrix> {
    m.expect_dims(4, 4)?;
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let defect = m.hermiticity_defect();
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
        return Err(Error::InvalidTrace(tr.re));
    }
    let h = m.hermitian_part();
    let min = herm_eig(&h)?.values[0];
    if min < -tol {
        return Err(Error::NotPositive(min));
    }
    Ok(DensityMatrix(h))
}

/// A 2×2 filter with operator norm at most one.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalOperator(CMat);

impl LocalOperator {
    pub fn new(m: CMat) -> Result<Self> {
        m.expect_dims(2, 2)?;
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let smax = singular_values_2x2(&m)[0];
        if smax > 1.0 + LOCAL_OP_TOL {
            return Err(Error::NormExceeded(smax));
        }
        Ok(Self(m))
    }

    /// Rescales `m` so that its largest singular value is exactly one.
    pub fn normalized(m: CMat) -> Result<Self> {
        m.expect_dims(2, 2)?;
        let smax = singular_values_2x2(&m)[0];
        if !(smax > 0.0) {
            return Err(Error::ZeroOperator("filter"));
        }
        Ok(Self(m.scale(1.0 / smax)))
    }

    pub fn identity() -> Self {
        Self(CMat::identity(2))
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    pub fn singular_values(&self) -> [f64; 2] {
        singular_values_2x2(&self.0)
    }

    /// Removes the global phase by making the largest-modulus entry real positive.
    pub fn phase_fixed(&self) -> CMat {
        let pivot = self
            .0
            .as_slice()
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or_default();
        if pivot.norm() == 0.0 {
            return self.0.clone();
        }
        self.0.scale_c(pivot.conj() / pivot.norm())
    }
}

/// Unit vector in C^4.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState([Complex64; 4]);

impl PureState {
    pub fn new(v: [Complex64; 4]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self(v))
    }

    pub fn normalized(v: [Complex64; 4]) -> Result<Self> {
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self(v.map(|z| z / norm)))
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        self.0
    }

    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    /// Amplitudes arranged as the 2×2 matrix M with |v⟩ = Σ M_ij |ij⟩.
    pub fn coefficient_matrix(&self) -> CMat {
        CMat::from_fn(2, 2, |i, j| self.0[2 * i + j])
    }

    /// Pure-state concurrence 2|ad − bc|.
    pub fn concurrence(&self) -> f64 {
        let [a, b, c, d] = self.0;
        (2.0 * (a * d - b * c).norm()).min(1.0)
    }
}

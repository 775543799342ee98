//! Dense complex matrices for one- and two-qubit operators.
//!
//! Two-qubit operators use the basis order |00⟩, |01⟩, |10⟩, |11⟩ with the
//! first tensor factor belonging to party A. The partial transpose is always
//! taken on party B.

mod eig;
mod state;

pub use eig::{herm_eig, HermEig};
pub use state::{validate_density, validate_density_with_tol, DensityMatrix, LocalOperator, PureState};

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Self {
        Self::from_fn(N, N, |i, j| rows[i][j])
    }

    pub fn from_real<const N: usize>(rows: [[f64; N]; N]) -> Self {
        Self::from_fn(N, N, |i, j| Complex64::new(rows[i][j], 0.0))
    }

    pub fn diag(d: &[Complex64]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { ZERO })
    }

    pub fn diag_real(d: &[f64]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| {
            if i == j {
                Complex64::new(d[i], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// Projector |v⟩⟨v| (not normalized).
    pub fn outer(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn expect_dims(&self, rows: usize, cols: usize) -> Result<()> {
        if self.dims() != (rows, cols) {
            return Err(Error::DimensionMismatch {
                expected: (rows, cols),
                got: self.dims(),
            });
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_c(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Real part of Tr(self · other) for Hermitian operands.
    pub fn trace_product(&self, other: &CMat) -> f64 {
        debug_assert_eq!(self.cols, other.rows);
        debug_assert_eq!(self.rows, other.cols);
        let mut s = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                s += self[(i, k)] * other[(k, i)];
            }
        }
        s.re
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.dims(), other.dims());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// ⟨v|self|v⟩, real part.
    pub fn expectation(&self, v: &[Complex64]) -> f64 {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum::<Complex64>().re
    }

    /// self · other · self†
    pub fn sandwich(&self, other: &CMat) -> CMat {
        &(self * other) * &self.adjoint()
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;

    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &CMat {
    type Output = CMat;

    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.dims(), rhs.dims());
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMat {
    type Output = CMat;

    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.dims(), rhs.dims());
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

pub fn pauli_x() -> CMat {
    CMat::from_real([[0.0, 1.0], [1.0, 0.0]])
}

pub fn pauli_y() -> CMat {
    CMat::from_rows([[ZERO, -I], [I, ZERO]])
}

pub fn pauli_z() -> CMat {
    CMat::from_real([[1.0, 0.0], [0.0, -1.0]])
}

/// σ_x, σ_y, σ_z in that order.
pub fn paulis() -> [CMat; 3] {
    [pauli_x(), pauli_y(), pauli_z()]
}

/// Kronecker product of two 2×2 matrices; entry (2i+k, 2j+l) is a[i,j]·b[k,l].
pub fn kron(a: &CMat, b: &CMat) -> Result<CMat> {
    a.expect_dims(2, 2)?;
    b.expect_dims(2, 2)?;
    Ok(CMat::from_fn(4, 4, |r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)]))
}

/// Partial transpose on party B: entry ((i,j),(k,l)) moves to ((i,l),(k,j)).
pub fn partial_transpose_b(m: &CMat) -> Result<CMat> {
    m.expect_dims(4, 4)?;
    Ok(CMat::from_fn(4, 4, |r, c| {
        let (i, l) = (r / 2, r % 2);
        let (k, j) = (c / 2, c % 2);
        m[(2 * i + j, 2 * k + l)]
    }))
}

/// Partial transpose on party A. Only used to exercise convention checks.
pub fn partial_transpose_a(m: &CMat) -> Result<CMat> {
    m.expect_dims(4, 4)?;
    Ok(CMat::from_fn(4, 4, |r, c| {
        let (k, j) = (r / 2, r % 2);
        let (i, l) = (c / 2, c % 2);
        m[(2 * i + j, 2 * k + l)]
    }))
}

/// Reduced state of party A.
pub fn trace_out_b(m: &CMat) -> Result<CMat> {
    m.expect_dims(4, 4)?;
    Ok(CMat::from_fn(2, 2, |i, k| m[(2 * i, 2 * k)] + m[(2 * i + 1, 2 * k + 1)]))
}

/// Reduced state of party B.
pub fn trace_out_a(m: &CMat) -> Result<CMat> {
    m.expect_dims(4, 4)?;
    Ok(CMat::from_fn(2, 2, |j, l| m[(j, l)] + m[(2 + j, 2 + l)]))
}

/// Columns are the magic basis
/// (|00⟩+|11⟩)/√2, i(|00⟩−|11⟩)/√2, i(|01⟩+|10⟩)/√2, (|01⟩−|10⟩)/√2.
pub fn magic_basis() -> CMat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let r = Complex64::new(h, 0.0);
    let ih = I * h;
    CMat::from_rows([
        [r, ih, ZERO, ZERO],
        [ZERO, ZERO, ih, r],
        [ZERO, ZERO, ih, -r],
        [r, -ih, ZERO, ZERO],
    ])
}

/// M† ρ M with M the magic basis.
pub fn magic_transform(m: &CMat) -> Result<CMat> {
    m.expect_dims(4, 4)?;
    let mb = magic_basis();
    Ok(&(&mb.adjoint() * m) * &mb)
}

/// Inverse of `magic_transform`.
pub fn from_magic(m: &CMat) -> Result<CMat> {
    m.expect_dims(4, 4)?;
    let mb = magic_basis();
    Ok(&(&mb * m) * &mb.adjoint())
}

/// (|00⟩+|11⟩)/√2.
pub fn phi_plus() -> [Complex64; 4] {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [h, ZERO, ZERO, h]
}

/// Singular values of a 2×2 matrix, descending.
pub fn singular_values_2x2(a: &CMat) -> [f64; 2] {
    let gram = &a.adjoint() * a;
    let e = herm_eig(&gram).expect("Gram matrix is Hermitian");
    [e.values[1].max(0.0).sqrt(), e.values[0].max(0.0).sqrt()]
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn herm_apply(h: &CMat, f: impl Fn(f64) -> f64) -> Result<CMat> {
    let e = herm_eig(h)?;
    let n = h.rows();
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let fk = f(e.values[k]);
        for i in 0..n {
            let vik = e.vectors[(i, k)] * fk;
            for j in 0..n {
                out[(i, j)] += vik * e.vectors[(j, k)].conj();
            }
        }
    }
    Ok(out)
}

/// Projects a Hermitian matrix onto the PSD cone.
pub fn psd_part(h: &CMat) -> Result<CMat> {
    herm_apply(h, |x| x.max(0.0))
}

pub fn min_eigenvalue(h: &CMat) -> Result<f64> {
    Ok(herm_eig(h)?.values[0])
}

pub fn max_eigenvalue(h: &CMat) -> Result<f64> {
    let e = herm_eig(h)?;
    Ok(e.values[e.values.len() - 1])
}

//! Scalar entanglement and fidelity functionals of a two-qubit state.

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{
    herm_eig, kron, magic_basis, magic_transform, partial_transpose_b, pauli_y, CMat,
    DensityMatrix, PureState,
};

/// λ_min(ρ^Γ) below this value counts as entangled.
pub const ENTANGLEMENT_THRESHOLD: f64 = 1e-10;

/// Width of the band around λ_min(ρ^Γ) = 0 in which states are flagged as
/// near the separability boundary.
pub const NEAR_BOUNDARY_BAND: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct MeasureReport {
    pub singlet_fraction: f64,
    pub achieving_me_state: PureState,
    pub concurrence: f64,
    pub negativity: f64,
    pub entangled: bool,
    pub near_boundary: bool,
    pub teleport_fidelity: f64,
}

pub fn analyze(rho: &DensityMatrix) -> Result<MeasureReport> {
    let (f, psi) = singlet_fraction(rho)?;
    let lmin = min_pt_eigenvalue(rho)?;
    Ok(MeasureReport {
        singlet_fraction: f,
        achieving_me_state: psi,
        concurrence: concurrence(rho)?,
        negativity: negativity_from_min_eig(lmin),
        entangled: lmin < -ENTANGLEMENT_THRESHOLD,
        near_boundary: lmin.abs() <= NEAR_BOUNDARY_BAND,
        teleport_fidelity: teleport_fidelity_from_f(f.clamp(0.25, 1.0))?,
    })
}

/// Maximal overlap with a maximally entangled state and the state achieving it.
///
/// Maximally entangled states are exactly the real unit vectors in the magic
/// basis, so F is the top eigenvalue of Re(M†ρM).
pub fn singlet_fraction(rho: &DensityMatrix) -> Result<(f64, PureState)> {
    let m = magic_transform(rho.matrix())?;
    let re = m.map(|z| Complex64::new(z.re, 0.0));
    let eig = herm_eig(&re)?;
    let top = eig.vector(3);
    // The eigenvector is real up to a global phase; fix it on the largest entry.
    let pivot = top
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or_default();
    let phase = pivot.conj() / pivot.norm();
    let real: Vec<Complex64> = top.iter().map(|z| Complex64::new((z * phase).re, 0.0)).collect();
    let psi = magic_basis().mul_vec(&real);
    let psi = PureState::normalized([psi[0], psi[1], psi[2], psi[3]])?;
    let f = rho.matrix().expectation(psi.as_slice());
    Ok((f, psi))
}

/// Wootters concurrence.
///
/// With ρ = Σ|v_i⟩⟨v_i| over subnormalized eigenvectors, the λ_i are the
/// singular values of τ_ij = v_iᵀ(σ_y⊗σ_y)v_j. They coincide with the square
/// roots of the eigenvalues of √ρ ρ̃ √ρ, but rounding in the null space of a
/// rank-deficient ρ enters only at second order.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    let yy = kron(&pauli_y(), &pauli_y())?;
    let eig = herm_eig(rho.matrix())?;
    let v: Vec<Vec<Complex64>> = (0..4)
        .map(|k| {
            let w = eig.values[k].max(0.0).sqrt();
            eig.vector(k).into_iter().map(|z| z * w).collect()
        })
        .collect();
    let tau = Matrix4::from_fn(|i, j| {
        let yv = yy.mul_vec(&v[j]);
        v[i].iter().zip(&yv).map(|(a, b)| a * b).sum::<Complex64>()
    });
    let mut l: Vec<f64> = tau.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    Ok((l[0] - l[1] - l[2] - l[3]).max(0.0))
}

/// Smallest eigenvalue of the partial transpose.
pub fn min_pt_eigenvalue(rho: &DensityMatrix) -> Result<f64> {
    Ok(herm_eig(&partial_transpose_b(rho.matrix())?)?.values[0])
}

/// N = 2·max(0, −λ_min(ρ^Γ)); equals 1 for Bell states.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    Ok(negativity_from_min_eig(min_pt_eigenvalue(rho)?))
}

fn negativity_from_min_eig(lmin: f64) -> f64 {
    2.0 * (-lmin).max(0.0)
}

/// Peres–Horodecki test, exact for two qubits.
pub fn is_entangled(rho: &DensityMatrix) -> Result<bool> {
    Ok(min_pt_eigenvalue(rho)? < -ENTANGLEMENT_THRESHOLD)
}

/// Average teleportation fidelity f = (2F+1)/3 of the standard protocol.
pub fn teleport_fidelity_from_f(f: f64) -> Result<f64> {
    if !(0.25..=1.0).contains(&f) {
        return Err(Error::OutOfRange {
            name: "F",
            value: f,
            lo: 0.25,
            hi: 1.0,
        });
    }
    Ok((2.0 * f + 1.0) / 3.0)
}

/// Overlap ⟨ψ+|ρ|ψ+⟩ with ψ+ = (|00⟩+|11⟩)/√2.
pub fn phi_plus_overlap(m: &CMat) -> f64 {
    m.expectation(&crate::qmat::phi_plus())
}

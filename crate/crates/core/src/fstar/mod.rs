//! Maximal singlet fraction F* reachable by trace-preserving LOCC.
//!
//! F* is the value of the semidefinite program
//!
//! ```text
//! maximize   1/2 − Tr(X ρ^Γ)
//! subject to 0 ≤ X ≤ I,  X^Γ ≤ I/2
//! ```
//!
//! and equals the dual value
//!
//! ```text
//! minimize   1/2 + Tr(Z)/2
//! subject to Z ≥ 0,  (ρ + Z)^Γ ≥ 0.
//! ```
//!
//! The optimal X has rank one, X = (M⊗I)|ψ+⟩⟨ψ+|(M†⊗I), and the optimal
//! protocol is Alice's filter A = σ_y M† followed, on failure, by preparing a
//! product state. The dual Z gives the smallest weight p = Tr Z/(1 + Tr Z) with
//! which ρ must be mixed with another state to become separable, and
//! F* = 1/(2(1−p)).
//!
//! Both programs are solved by independent log-det barrier runs; the reported
//! duality gap is the difference of the two objectives at strictly feasible
//! points.

mod barrier;
mod bounds;
mod family;

pub use bounds::{fstar_bounds, BoundsReport};
pub use family::{family_filter, family_fstar, family_state, FamilyFilter};

use crate::error::{Error, Result};
use crate::measures::ENTANGLEMENT_THRESHOLD;
use crate::qmat::{
    herm_eig, min_eigenvalue, partial_transpose_b, pauli_y, CMat, DensityMatrix,
    LocalOperator,
};
use barrier::{minimize, Block};

pub const DEFAULT_TOL: f64 = 1e-8;
/// Second eigenvalue below which an optimizer counts as rank one.
pub const RANK_ONE_TOL: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct FstarSolution {
    pub fstar: f64,
    pub x_opt: CMat,
    /// Second-largest eigenvalue of `x_opt`.
    pub rank_gap: f64,
    /// Principal factor M of x_opt ≈ (M⊗I)|ψ+⟩⟨ψ+|(M†⊗I); `None` when X = 0.
    pub x_factor: Option<LocalOperator>,
    /// Alice's optimal filter σ_y M†, scaled to unit operator norm; `None`
    /// for separable states, where no filter improves on F = 1/2.
    pub filter_a: Option<LocalOperator>,
    /// Dual objective of the certificate minus the primal objective.
    pub duality_gap: f64,
    pub dual_objective: f64,
    pub iterations: usize,
}

impl FstarSolution {
    /// Average teleportation fidelity after the optimal protocol.
    pub fn teleport_fidelity(&self) -> f64 {
        (2.0 * self.fstar + 1.0) / 3.0
    }
}

#[derive(Clone, Debug)]
pub struct DualSolution {
    pub g: f64,
    pub z: CMat,
    pub mixing_p: f64,
    /// Z/Tr Z; `None` when Z = 0.
    pub rho_z: Option<DensityMatrix>,
    /// (1−p)ρ + p ρ_Z, which is PPT and therefore separable.
    pub rho_mix: DensityMatrix,
}

/// Residuals of the primal constraints; all non-positive for a feasible X.
#[derive(Clone, Copy, Debug)]
pub struct PrimalFeasibility {
    /// −λ_min(X)
    pub psd: f64,
    /// λ_max(X) − 1
    pub upper: f64,
    /// λ_max(X^Γ) − 1/2
    pub pt_upper: f64,
    /// −1/2 − λ_min(X^Γ), the constraint that holds without being imposed.
    pub pt_lower: f64,
}

impl PrimalFeasibility {
    pub fn worst(&self) -> f64 {
        self.psd.max(self.upper).max(self.pt_upper).max(self.pt_lower)
    }
}

pub fn primal_feasibility(x: &CMat) -> Result<PrimalFeasibility> {
    let pt = partial_transpose_b(x)?;
    let ex = herm_eig(x)?.values;
    let ep = herm_eig(&pt)?.values;
    Ok(PrimalFeasibility {
        psd: -ex[0],
        upper: ex[3] - 1.0,
        pt_upper: ep[3] - 0.5,
        pt_lower: -0.5 - ep[0],
    })
}

/// Largest violation of Z ≥ 0 and (ρ+Z)^Γ ≥ 0.
pub fn dual_violation(rho: &DensityMatrix, z: &CMat) -> Result<f64> {
    let a = -min_eigenvalue(z)?;
    let b = -min_eigenvalue(&partial_transpose_b(&(rho.matrix() + z))?)?;
    Ok(a.max(b).max(0.0))
}

pub fn primal_objective(rho: &DensityMatrix, x: &CMat) -> Result<f64> {
    Ok(0.5 - x.trace_product(&partial_transpose_b(rho.matrix())?))
}

pub fn dual_objective(z: &CMat) -> f64 {
    0.5 + 0.5 * z.trace().re
}

pub fn solve_primal(rho: &DensityMatrix, tol: f64) -> Result<FstarSolution> {
    Ok(solve(rho, tol)?.0)
}

pub fn solve_dual(rho: &DensityMatrix, tol: f64) -> Result<DualSolution> {
    Ok(solve(rho, tol)?.1)
}

/// Solves the primal and the dual program and certifies the gap.
pub fn solve(rho: &DensityMatrix, tol: f64) -> Result<(FstarSolution, DualSolution)> {
    if !(tol > 0.0) {
        return Err(Error::OutOfRange {
            name: "tol",
            value: tol,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let rho_pt = partial_transpose_b(rho.matrix())?;
    let lmin = min_eigenvalue(&rho_pt)?;
    if lmin >= -ENTANGLEMENT_THRESHOLD {
        return Ok(separable_solution(rho));
    }

    let id = CMat::identity(4);
    let primal_blocks = [
        Block::new(CMat::zeros(4, 4), 1.0, false),
        Block::new(id.clone(), -1.0, false),
        Block::new(id.scale(0.5), -1.0, true),
    ];
    let primal = minimize(&rho_pt, &primal_blocks, &id.scale(0.25), tol / 4.0)?;
    let x_opt = primal.point;
    let fstar = 0.5 - x_opt.trace_product(&rho_pt);

    let dual_blocks = [
        Block::new(CMat::zeros(4, 4), 1.0, false),
        Block::new(rho_pt.clone(), 1.0, true),
    ];
    let shift = -lmin + 0.5;
    let dual = minimize(&id.scale(0.5), &dual_blocks, &id.scale(shift), tol / 4.0)?;
    let z = dual.point;
    let g = dual_objective(&z);

    let duality_gap = g - fstar;
    if !(duality_gap.abs() < tol) {
        return Err(Error::NoConvergence {
            what: "duality gap certification",
            iterations: primal.newton_steps + dual.newton_steps,
        });
    }

    let (x_factor, rank_gap) = extract_filter(&x_opt)?;
    let filter_a = Some(factor_to_filter(&x_factor)?);
    let solution = FstarSolution {
        fstar,
        x_opt,
        rank_gap,
        x_factor: Some(x_factor),
        filter_a,
        duality_gap,
        dual_objective: g,
        iterations: primal.newton_steps + dual.newton_steps,
    };
    Ok((solution, robustness_decomposition(rho, z)?))
}

fn separable_solution(rho: &DensityMatrix) -> (FstarSolution, DualSolution) {
    let solution = FstarSolution {
        fstar: 0.5,
        x_opt: CMat::zeros(4, 4),
        rank_gap: 0.0,
        x_factor: None,
        filter_a: None,
        duality_gap: 0.0,
        dual_objective: 0.5,
        iterations: 0,
    };
    let dual = DualSolution {
        g: 0.5,
        z: CMat::zeros(4, 4),
        mixing_p: 0.0,
        rho_z: None,
        rho_mix: rho.clone(),
    };
    (solution, dual)
}

fn robustness_decomposition(rho: &DensityMatrix, z: CMat) -> Result<DualSolution> {
    let tr = z.trace().re;
    let g = 0.5 + 0.5 * tr;
    let mixing_p = tr / (1.0 + tr);
    let rho_z = DensityMatrix::from_unnormalized(&z)?;
    let rho_mix = DensityMatrix::from_unnormalized(&(rho.matrix() + &z))?;
    Ok(DualSolution {
        g,
        z,
        mixing_p,
        rho_z: Some(rho_z),
        rho_mix,
    })
}

/// Principal factor M of X ≈ (M⊗I)|ψ+⟩⟨ψ+|(M†⊗I), scaled to unit operator
/// norm, and the rank-one defect (second-largest eigenvalue of X).
///
/// With |ψ+⟩ = (|00⟩+|11⟩)/√2, (M⊗I)|ψ+⟩ has amplitudes (m₀₀, m₀₁, m₁₀, m₁₁)/√2,
/// so M is √(2λ) times the principal eigenvector read row-major.
pub fn extract_filter(x_opt: &CMat) -> Result<(LocalOperator, f64)> {
    x_opt.expect_dims(4, 4)?;
    let e = herm_eig(x_opt)?;
    let lambda = e.values[3];
    if !(lambda > 1e-14) {
        return Err(Error::ZeroOperator("optimal X"));
    }
    let v = e.vector(3);
    let scale = (2.0 * lambda).sqrt();
    let m = CMat::from_fn(2, 2, |i, j| v[2 * i + j] * scale);
    Ok((LocalOperator::normalized(m)?, e.values[2].max(0.0)))
}

/// Alice's filter A = σ_y M† for the factor M of the optimal X (Bob does nothing).
pub fn factor_to_filter(factor: &LocalOperator) -> Result<LocalOperator> {
    LocalOperator::normalized(&pauli_y() * &factor.matrix().adjoint())
}

/// Inverse of [`factor_to_filter`]: M = (σ_y A)†.
pub fn filter_to_factor(filter: &LocalOperator) -> Result<LocalOperator> {
    LocalOperator::normalized((&pauli_y() * filter.matrix()).adjoint())
}

/// X = (M⊗I)|ψ+⟩⟨ψ+|(M†⊗I).
pub fn factor_to_x(m: &CMat) -> Result<CMat> {
    m.expect_dims(2, 2)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v: Vec<_> = (0..4).map(|k| m[(k / 2, k % 2)] * h).collect();
    Ok(CMat::outer(&v))
}

/// True when the second eigenvalue of X is below `tol` (X = 0 counts as rank one).
pub fn verify_rank_one(x_opt: &CMat, tol: f64) -> Result<bool> {
    let e = herm_eig(x_opt)?;
    Ok(e.values[2] < tol)
}

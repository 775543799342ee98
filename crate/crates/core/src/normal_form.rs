//! Bell-diagonal normal form under local filtering.
//!
//! Alternating local filters (2ρ_A)^{-1/2} and (2ρ_B)^{-1/2} drive both
//! marginals to I/2; a pair of local unitaries obtained from a signed SVD of
//! the correlation matrix then makes the state Bell-diagonal. The result is
//! the unique normal form reachable by SLOCC, and it has the largest
//! concurrence among all locally filtered versions of the input.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measures::is_entangled;
use crate::qmat::{
    herm_apply, herm_eig, kron, magic_transform, pauli_x, pauli_y, pauli_z, paulis, trace_out_a,
    trace_out_b, CMat, DensityMatrix, LocalOperator,
};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Marginal eigenvalues below this abort the iteration.
pub const RANK_THRESHOLD: f64 = 1e-12;
const MARGINAL_TOL: f64 = 1e-8;
/// Plain alternating sweeps before switching to Newton steps.
pub const ALTERNATION_SWEEPS: usize = 200;
const MAX_NEWTON_STEP: f64 = 4.0;
const MIN_SUCCESS_PROB: f64 = 1e-200;

/// t_ij = Tr(ρ σ_i⊗σ_j) for i, j ∈ {x, y, z}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationMatrix(pub [[f64; 3]; 3]);

impl CorrelationMatrix {
    fn to_na(self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.0[i][j])
    }
}

#[derive(Clone, Debug)]
pub struct SinkhornResult {
    pub rho_mm: DensityMatrix,
    pub filter_a: LocalOperator,
    pub filter_b: LocalOperator,
    pub success_prob: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct BellDiagonalization {
    pub u: CMat,
    pub v: CMat,
    pub rho_bd: DensityMatrix,
    /// Bell-basis weights, descending; the first sits on (|00⟩+|11⟩)/√2.
    pub coefficients: [f64; 4],
}

#[derive(Clone, Debug)]
pub struct NormalFormResult {
    pub rho_nf: DensityMatrix,
    pub filter_a: LocalOperator,
    pub filter_b: LocalOperator,
    pub success_prob: f64,
    pub bell_coefficients: [f64; 4],
    pub fidelity_nf: f64,
    /// Whether the input (equivalently the normal form) is entangled.
    pub entangled: bool,
    pub iterations: usize,
}

pub fn correlation_matrix(rho: &DensityMatrix) -> CorrelationMatrix {
    let s = paulis();
    let mut t = [[0.0; 3]; 3];
    for (i, si) in s.iter().enumerate() {
        for (j, sj) in s.iter().enumerate() {
            let op = kron(si, sj).expect("2x2 operands");
            t[i][j] = rho.matrix().trace_product(&op);
        }
    }
    CorrelationMatrix(t)
}

/// Local Bloch vectors (Tr ρ σ_i⊗I, Tr ρ I⊗σ_i).
pub fn local_bloch_vectors(rho: &DensityMatrix) -> ([f64; 3], [f64; 3]) {
    let ra = trace_out_b(rho.matrix()).expect("4x4");
    let rb = trace_out_a(rho.matrix()).expect("4x4");
    let s = paulis();
    let a = [0, 1, 2].map(|i| ra.trace_product(&s[i]));
    let b = [0, 1, 2].map(|i| rb.trace_product(&s[i]));
    (a, b)
}

fn marginal_deviation(m: &CMat) -> f64 {
    m.max_abs_diff(&CMat::identity(2).scale(0.5))
}

/// Largest deviation of either marginal from I/2.
pub fn marginal_defect(rho: &DensityMatrix) -> f64 {
    let a = trace_out_b(rho.matrix()).expect("4x4");
    let b = trace_out_a(rho.matrix()).expect("4x4");
    marginal_deviation(&a).max(marginal_deviation(&b))
}

/// Largest off-diagonal modulus of ρ in the magic (Bell) basis.
pub fn bell_offdiagonal_residual(rho: &DensityMatrix) -> f64 {
    let m = magic_transform(rho.matrix()).expect("4x4");
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

fn inverse_sqrt_of_doubled(marginal: &CMat) -> Result<CMat> {
    let ev = herm_eig(marginal)?.values;
    if ev[0] < RANK_THRESHOLD {
        return Err(Error::DegenerateMarginal(ev[0]));
    }
    herm_apply(&marginal.scale(2.0), |x| 1.0 / x.sqrt())
}

fn normalize_accumulator(m: &CMat) -> CMat {
    let s = m.max_abs();
    m.scale(1.0 / s)
}

/// Applies `a ⊗ b` to ρ and returns (unnormalized result, trace).
pub fn apply_local(rho: &CMat, a: &CMat, b: &CMat) -> (CMat, f64) {
    let op = kron(a, b).expect("2x2 filters");
    let out = op.sandwich(rho).hermitian_part();
    let p = out.trace().re;
    (out, p)
}

/// Alternating marginal equalization.
///
/// Runs plain alternating sweeps first. If they have not met `tol` after
/// [`ALTERNATION_SWEEPS`] sweeps, the remaining iterations take Newton steps
/// on the scaling potential log Tr(ρ(e^X⊗e^Y)) over traceless Hermitian X, Y.
/// The sweeps converge only sublinearly for states whose normal form is a
/// limit (filters tending to zero, e.g. F|ψ+⟩⟨ψ+| + (1−F)|01⟩⟨01|); the
/// Newton steps shrink the filters geometrically there.
pub fn sinkhorn_filter_iteration(rho: &DensityMatrix, tol: f64, max_iter: usize) -> Result<SinkhornResult> {
    let id = CMat::identity(2);
    let mut state = rho.matrix().clone();
    let mut acc_a = id.clone();
    let mut acc_b = id.clone();
    let mut iterations = 0;
    loop {
        let ma = trace_out_b(&state)?;
        let mb = trace_out_a(&state)?;
        if marginal_deviation(&ma) < tol && marginal_deviation(&mb) < tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NoConvergence {
                what: "marginal equalization",
                iterations,
            });
        }
        let (fa, fb) = if iterations < ALTERNATION_SWEEPS {
            let fa = inverse_sqrt_of_doubled(&ma)?;
            let (next, p) = apply_local(&state, &fa, &id);
            let mb = trace_out_a(&next.scale(1.0 / p))?;
            let fb = inverse_sqrt_of_doubled(&mb)?;
            (fa, fb)
        } else {
            let ev_a = herm_eig(&ma)?.values[0];
            let ev_b = herm_eig(&mb)?.values[0];
            if ev_a.min(ev_b) < RANK_THRESHOLD {
                return Err(Error::DegenerateMarginal(ev_a.min(ev_b)));
            }
            newton_scaling_step(&state)?
        };
        let (next, p) = apply_local(&state, &fa, &fb);
        state = next.scale(1.0 / p);
        acc_a = normalize_accumulator(&(&fa * &acc_a));
        acc_b = normalize_accumulator(&(&fb * &acc_b));
        iterations += 1;
    }

    let filter_a = LocalOperator::normalized(acc_a)?;
    let filter_b = LocalOperator::normalized(acc_b)?;
    let (filtered, p) = apply_local(rho.matrix(), filter_a.matrix(), filter_b.matrix());
    if !(p > MIN_SUCCESS_PROB) {
        return Err(Error::DegenerateMarginal(p));
    }
    Ok(SinkhornResult {
        rho_mm: DensityMatrix::from_unnormalized(&filtered)?,
        filter_a,
        filter_b,
        success_prob: p,
        iterations,
    })
}

/// exp(x·σ) for real x.
fn pauli_exp(x: &Vector3<f64>) -> CMat {
    let n = x.norm();
    let s = paulis();
    let mut out = CMat::identity(2).scale(n.cosh());
    if n > 0.0 {
        let k = n.sinh() / n;
        for i in 0..3 {
            out = &out + &s[i].scale(k * x[i]);
        }
    }
    out
}

fn scaling_potential(rho: &CMat, x: &Vector3<f64>, y: &Vector3<f64>) -> f64 {
    let op = kron(&pauli_exp(x), &pauli_exp(y)).expect("2x2");
    rho.trace_product(&op).ln()
}

/// One damped Newton step on φ(X, Y) = log Tr(ρ (e^X ⊗ e^Y)) at X = Y = 0.
///
/// With local Bloch vectors a, b and correlation matrix T of the current
/// (normalized) state, ∇φ = (a, b) and
/// ∇²φ = [[I − aaᵀ, T − abᵀ], [Tᵀ − baᵀ, I − bbᵀ]].
/// Returns the filters (e^{X/2}, e^{Y/2}).
fn newton_scaling_step(state: &CMat) -> Result<(CMat, CMat)> {
    let rho = DensityMatrix::from_unnormalized(state)?;
    let (a, b) = local_bloch_vectors(&rho);
    let t = correlation_matrix(&rho).0;
    let grad = SVector::<f64, 6>::from_fn(|i, _| if i < 3 { a[i] } else { b[i - 3] });
    let hess = SMatrix::<f64, 6, 6>::from_fn(|i, j| {
        let base = match (i < 3, j < 3) {
            (true, true) => f64::from(u8::from(i == j)),
            (false, false) => f64::from(u8::from(i == j)),
            (true, false) => t[i][j - 3],
            (false, true) => t[j][i - 3],
        };
        base - grad[i] * grad[j]
    });
    // Pseudo-inverse: the curvature vanishes along directions in which the
    // filters run off to zero.
    let eig = hess.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(1.0);
    let mut step = SVector::<f64, 6>::zeros();
    for k in 0..6 {
        let lam = eig.eigenvalues[k];
        if lam > 1e-14 * scale {
            let v = eig.eigenvectors.column(k);
            step -= v * (v.dot(&grad) / lam);
        }
    }
    let len = step.norm();
    if len > MAX_NEWTON_STEP {
        step *= MAX_NEWTON_STEP / len;
    }
    let slope = grad.dot(&step);
    let mut alpha = 1.0;
    let (mut x, mut y);
    loop {
        x = Vector3::new(step[0], step[1], step[2]) * alpha;
        y = Vector3::new(step[3], step[4], step[5]) * alpha;
        let val = scaling_potential(rho.matrix(), &x, &y);
        if val <= 0.25 * alpha * slope || alpha < 1e-8 {
            break;
        }
        alpha *= 0.5;
    }
    Ok((pauli_exp(&(x * 0.5)), pauli_exp(&(y * 0.5))))
}

/// Lifts a proper rotation R to U ∈ SU(2) with U σ_j U† = Σ_i R_ij σ_i.
pub fn rotation_to_su2(r: &Matrix3<f64>) -> CMat {
    let tr = r[(0, 0)] + r[(1, 1)] + r[(2, 2)];
    let (w, x, y, z);
    if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        w = s / 4.0;
        x = (r[(2, 1)] - r[(1, 2)]) / s;
        y = (r[(0, 2)] - r[(2, 0)]) / s;
        z = (r[(1, 0)] - r[(0, 1)]) / s;
    } else if r[(0, 0)] > r[(1, 1)] && r[(0, 0)] > r[(2, 2)] {
        let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
        w = (r[(2, 1)] - r[(1, 2)]) / s;
        x = s / 4.0;
        y = (r[(0, 1)] + r[(1, 0)]) / s;
        z = (r[(0, 2)] + r[(2, 0)]) / s;
    } else if r[(1, 1)] > r[(2, 2)] {
        let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
        w = (r[(0, 2)] - r[(2, 0)]) / s;
        x = (r[(0, 1)] + r[(1, 0)]) / s;
        y = s / 4.0;
        z = (r[(1, 2)] + r[(2, 1)]) / s;
    } else {
        let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
        w = (r[(1, 0)] - r[(0, 1)]) / s;
        x = (r[(0, 2)] + r[(2, 0)]) / s;
        y = (r[(1, 2)] + r[(2, 1)]) / s;
        z = s / 4.0;
    }
    let n = (w * w + x * x + y * y + z * z).sqrt();
    let (w, x, y, z) = (w / n, x / n, y / n, z / n);
    // U = w I − i (x σx + y σy + z σz)
    CMat::from_rows([
        [Complex64::new(w, -z), Complex64::new(-y, -x)],
        [Complex64::new(y, -x), Complex64::new(w, z)],
    ])
}

/// T = O₁ Σ O₂ᵀ with O₁, O₂ ∈ SO(3); determinant signs go into Σ's last entry.
pub fn signed_svd(t: &CorrelationMatrix) -> (Matrix3<f64>, [f64; 3], Matrix3<f64>) {
    let svd = t.to_na().svd(true, true);
    let mut u = svd.u.expect("requested U");
    let mut v = svd.v_t.expect("requested Vᵀ").transpose();
    let mut s = [svd.singular_values[0], svd.singular_values[1], svd.singular_values[2]];
    if u.determinant() < 0.0 {
        u.column_mut(2).neg_mut();
        s[2] = -s[2];
    }
    if v.determinant() < 0.0 {
        v.column_mut(2).neg_mut();
        s[2] = -s[2];
    }
    (u, s, v)
}

/// Local unitaries making a state with maximally mixed marginals Bell-diagonal,
/// with its largest Bell weight on (|00⟩+|11⟩)/√2.
pub fn bell_diagonalize(rho_mm: &DensityMatrix) -> Result<BellDiagonalization> {
    let defect = marginal_defect(rho_mm);
    if defect > MARGINAL_TOL {
        return Err(Error::MarginalsNotMaximallyMixed(defect));
    }
    let (o1, _, o2) = signed_svd(&correlation_matrix(rho_mm));
    let mut u = rotation_to_su2(&o1.transpose());
    let v = rotation_to_su2(&o2.transpose());

    let rotated = kron(&u, &v)?.sandwich(rho_mm.matrix()).hermitian_part();
    let weights = bell_weights(&rotated)?;
    let best = (0..4).max_by(|&i, &j| weights[i].total_cmp(&weights[j])).unwrap_or(0);
    // Pauli on A exchanging the best Bell state with (|00⟩+|11⟩)/√2.
    let flip = match best {
        0 => CMat::identity(2),
        1 => pauli_z(),
        2 => pauli_x(),
        _ => pauli_y(),
    };
    u = &flip * &u;
    let rho_bd = kron(&u, &v)?.sandwich(rho_mm.matrix()).hermitian_part();
    let rho_bd = DensityMatrix::from_unnormalized(&rho_bd)?;
    let mut coefficients = bell_weights(rho_bd.matrix())?;
    coefficients.sort_by(|a, b| b.total_cmp(a));
    Ok(BellDiagonalization {
        u,
        v,
        rho_bd,
        coefficients,
    })
}

/// Diagonal of ρ in the magic basis.
pub fn bell_weights(m: &CMat) -> Result<[f64; 4]> {
    let mm = magic_transform(m)?;
    Ok([0, 1, 2, 3].map(|i| mm[(i, i)].re))
}

pub fn normal_form(rho: &DensityMatrix) -> Result<NormalFormResult> {
    normal_form_with(rho, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

pub fn normal_form_with(rho: &DensityMatrix, tol: f64, max_iter: usize) -> Result<NormalFormResult> {
    let sk = sinkhorn_filter_iteration(rho, tol, max_iter)?;
    let bd = bell_diagonalize(&sk.rho_mm)?;
    let filter_a = LocalOperator::normalized(&bd.u * sk.filter_a.matrix())?;
    let filter_b = LocalOperator::normalized(&bd.v * sk.filter_b.matrix())?;
    let (_, success_prob) = apply_local(rho.matrix(), filter_a.matrix(), filter_b.matrix());
    let fidelity_nf = crate::measures::phi_plus_overlap(bd.rho_bd.matrix());
    Ok(NormalFormResult {
        rho_nf: bd.rho_bd,
        filter_a,
        filter_b,
        success_prob,
        bell_coefficients: bd.coefficients,
        fidelity_nf,
        entangled: is_entangled(rho)?,
        iterations: sk.iterations,
    })
}

//! Filtering protocols and the standard teleportation channel.
//!
//! The one-way protocol: Alice applies a filter A (Bob applies B). On success
//! the pair holds ρ_f = (A⊗B)ρ(A⊗B)†/p; on failure both prepare a product
//! state χ with |⟨χ|ψ⟩|² = 1/2 for the target maximally entangled ψ. Its
//! fidelity with |ψ+⟩ is
//!
//! ```text
//! K = p⟨ψ+|ρ_f|ψ+⟩ + (1−p)/2 = 1/2 − ⟨ψ+|(C⊗I)ρ^Γ(C†⊗I)|ψ+⟩,   C = B†σ_y A.
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fstar::{solve_primal, DEFAULT_TOL};
use crate::measures::{phi_plus_overlap, singlet_fraction};
use crate::normal_form::{apply_local, normal_form};
use crate::qmat::{
    kron, partial_transpose_b, pauli_x, pauli_y, pauli_z, paulis, phi_plus, CMat, DensityMatrix,
    LocalOperator, PureState, ONE, ZERO,
};

/// Tolerance for agreement of the two evaluations of K.
pub const K_CONSISTENCY_TOL: f64 = 1e-10;

/// Success probabilities below this are treated as a filter that always fails.
const MIN_SUCCESS_PROB: f64 = 1e-300;

#[derive(Clone, Debug)]
pub struct ProtocolOutcome {
    pub success_prob: f64,
    pub rho_f: DensityMatrix,
    /// Product state prepared on failure.
    pub chi: PureState,
    /// Maximally entangled state with the largest overlap with `rho_f`.
    pub target: PureState,
    /// Overlap of the averaged output with `target`.
    pub k_value: f64,
}

impl ProtocolOutcome {
    /// Averaged output p·ρ_f + (1−p)|χ⟩⟨χ|.
    pub fn output_state(&self) -> Result<DensityMatrix> {
        let p = self.success_prob;
        let m = &self.rho_f.matrix().scale(p) + &CMat::outer(self.chi.as_slice()).scale(1.0 - p);
        DensityMatrix::from_unnormalized(&m)
    }
}

/// Affine action v ↦ M v + c of a qubit channel on Bloch vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelImage {
    pub m: [[f64; 3]; 3],
    pub c: [f64; 3],
    pub avg_fidelity: f64,
    /// (input direction, output Bloch vector)
    pub samples: Vec<([f64; 3], [f64; 3])>,
}

impl ChannelImage {
    pub fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        let mut out = self.c;
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..3 {
                *o += self.m[i][j] * v[j];
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preprocessing {
    /// Local unitaries maximizing the overlap with |ψ+⟩.
    Lu,
    /// The optimal trace-preserving filtering protocol, both branches averaged.
    Locc,
    /// The normal-form filters, conditioned on success.
    Slocc,
}

/// K from the partial-transpose form, using `transpose` as the partial
/// transpose on B. Exposed so the convention can be checked against
/// deliberately wrong transposes.
pub fn k_cost_transposed(
    rho: &DensityMatrix,
    a: &LocalOperator,
    b: &LocalOperator,
    transpose: impl Fn(&CMat) -> Result<CMat>,
) -> Result<f64> {
    let c = &(&b.matrix().adjoint() * &pauli_y()) * a.matrix();
    let op = kron(&c.adjoint(), &CMat::identity(2))?;
    let v = op.mul_vec(&phi_plus());
    Ok(0.5 - transpose(rho.matrix())?.expectation(&v))
}

/// K = p⟨ψ+|ρ_f|ψ+⟩ + (1−p)/2 evaluated on the filtered state.
pub fn k_cost_direct(rho: &DensityMatrix, a: &LocalOperator, b: &LocalOperator) -> f64 {
    let (filtered, p) = apply_local(rho.matrix(), a.matrix(), b.matrix());
    phi_plus_overlap(&filtered) + 0.5 * (1.0 - p)
}

/// Fidelity with |ψ+⟩ of the filtering protocol (A, B); both forms are
/// evaluated and must agree.
pub fn k_cost(rho: &DensityMatrix, a: &LocalOperator, b: &LocalOperator) -> Result<f64> {
    let direct = k_cost_direct(rho, a, b);
    let transposed = k_cost_transposed(rho, a, b, partial_transpose_b)?;
    if (direct - transposed).abs() > K_CONSISTENCY_TOL {
        return Err(Error::Inconsistent(format!(
            "filter fidelity forms disagree: direct {direct}, transposed {transposed}"
        )));
    }
    Ok(direct)
}

/// Unitary W with (W⊗I)|ψ+⟩ = ψ for a maximally entangled ψ.
fn me_unitary(psi: &PureState) -> CMat {
    psi.coefficient_matrix().scale(std::f64::consts::SQRT_2)
}

/// Runs Alice's filter `a` with the failure branch prepared as
/// χ = (W|0⟩)⊗|0⟩, where (W⊗I)|ψ+⟩ is the best maximally entangled state for
/// the filtered pair.
pub fn build_protocol(rho: &DensityMatrix, a: &LocalOperator) -> Result<ProtocolOutcome> {
    let (filtered, p) = apply_local(rho.matrix(), a.matrix(), &CMat::identity(2));
    if !(p > MIN_SUCCESS_PROB) {
        return Err(Error::ZeroOperator("filter"));
    }
    let rho_f = DensityMatrix::from_unnormalized(&filtered)?;
    let (f, target) = singlet_fraction(&rho_f)?;
    let w = me_unitary(&target);
    let chi = PureState::normalized([w[(0, 0)], ZERO, w[(1, 0)], ZERO])?;
    Ok(ProtocolOutcome {
        success_prob: p.min(1.0),
        rho_f,
        chi,
        target,
        k_value: p.min(1.0) * f + 0.5 * (1.0 - p.min(1.0)),
    })
}

/// Rotates ρ by U⊗V so that its best maximally entangled state becomes |ψ+⟩.
pub fn lu_align(rho: &DensityMatrix) -> Result<(DensityMatrix, CMat, CMat)> {
    let (_, psi) = singlet_fraction(rho)?;
    let u = me_unitary(&psi).adjoint();
    let v = CMat::identity(2);
    let (aligned, _) = apply_local(rho.matrix(), &u, &v);
    Ok((DensityMatrix::from_unnormalized(&aligned)?, u, v))
}

/// Bell outcomes (P⊗I)|ψ+⟩ on (input, Alice) with the Pauli corrections P.
fn bell_outcomes() -> [CMat; 4] {
    [CMat::identity(2), pauli_z(), pauli_x(), &pauli_x() * &pauli_z()]
}

/// Bob's qubit after the standard protocol on input σ with the given resource.
fn teleport_state(sigma: &CMat, resource: &CMat) -> CMat {
    let mut out = CMat::zeros(2, 2);
    for p in bell_outcomes() {
        let beta = kron(&p, &CMat::identity(2)).expect("2x2").mul_vec(&phi_plus());
        let mut bob = CMat::zeros(2, 2);
        for (ca, &bca) in beta.iter().enumerate() {
            let (c, a) = (ca / 2, ca % 2);
            for (ca2, &bca2) in beta.iter().enumerate() {
                let (c2, a2) = (ca2 / 2, ca2 % 2);
                let w = bca.conj() * bca2 * sigma[(c, c2)];
                if w == ZERO {
                    continue;
                }
                for b in 0..2 {
                    for b2 in 0..2 {
                        bob[(b, b2)] += w * resource[(2 * a + b, 2 * a2 + b2)];
                    }
                }
            }
        }
        out = &out + &p.sandwich(&bob);
    }
    out
}

fn bloch_of(m: &CMat) -> [f64; 3] {
    let ps = paulis();
    [0, 1, 2].map(|k| m.trace_product(&ps[k]))
}

fn state_of(v: &[f64; 3]) -> CMat {
    let ps = paulis();
    let mut m = CMat::identity(2);
    for k in 0..3 {
        m = &m + &ps[k].scale(v[k]);
    }
    m.scale(0.5)
}

/// The teleportation channel of `resource` as an affine Bloch map (no samples).
pub fn teleport_channel(resource: &DensityMatrix) -> ChannelImage {
    let r = resource.matrix();
    let c = bloch_of(&teleport_state(&CMat::identity(2).scale(0.5), r));
    let mut m = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        let out = bloch_of(&teleport_state(&state_of(&e), r));
        for i in 0..3 {
            m[i][j] = out[i] - c[i];
        }
    }
    let avg_fidelity = 0.5 + (m[0][0] + m[1][1] + m[2][2]) / 6.0;
    ChannelImage {
        m,
        c,
        avg_fidelity,
        samples: Vec::new(),
    }
}

/// Average over pure inputs of the fidelity between input and output.
pub fn average_fidelity(resource: &DensityMatrix) -> f64 {
    teleport_channel(resource).avg_fidelity
}

/// Resource state after the chosen preprocessing of ρ.
pub fn preprocess(rho: &DensityMatrix, mode: Preprocessing) -> Result<DensityMatrix> {
    match mode {
        Preprocessing::Lu => Ok(lu_align(rho)?.0),
        Preprocessing::Locc => {
            let solution = solve_primal(rho, DEFAULT_TOL)?;
            let Some(filter) = solution.filter_a else {
                let mut m = CMat::zeros(4, 4);
                m[(0, 0)] = ONE;
                return DensityMatrix::from_unnormalized(&m);
            };
            let outcome = build_protocol(rho, &filter)?;
            let w = me_unitary(&outcome.target).adjoint();
            let (aligned, _) = apply_local(outcome.output_state()?.matrix(), &w, &CMat::identity(2));
            DensityMatrix::from_unnormalized(&aligned)
        }
        Preprocessing::Slocc => Ok(normal_form(rho)?.rho_nf),
    }
}

/// `n` quasi-uniform unit vectors on a Fibonacci lattice, rotated about z by
/// an angle drawn from `seed`.
pub fn sphere_samples(n: usize, seed: u64) -> Vec<[f64; 3]> {
    let offset: f64 = ChaCha8Rng::seed_from_u64(seed).random::<f64>() * std::f64::consts::TAU;
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = offset + golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Channel of the preprocessed resource with `n_samples` sampled inputs.
pub fn bloch_image(rho: &DensityMatrix, mode: Preprocessing, n_samples: usize, seed: u64) -> Result<ChannelImage> {
    if n_samples == 0 {
        return Err(Error::OutOfRange {
            name: "n_samples",
            value: 0.0,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let mut image = teleport_channel(&preprocess(rho, mode)?);
    image.samples = sphere_samples(n_samples, seed)
        .into_iter()
        .map(|v| (v, image.apply(&v)))
        .collect();
    Ok(image)
}

/// Direct fidelity ⟨φ|Λ(φ)|φ⟩ for a pure input with Bloch vector `v`, used to
/// cross-check the closed-form average.
pub fn pure_input_fidelity(resource: &DensityMatrix, v: &[f64; 3]) -> f64 {
    let sigma = state_of(v);
    let out = teleport_state(&sigma, resource.matrix());
    out.trace_product(&sigma)
}

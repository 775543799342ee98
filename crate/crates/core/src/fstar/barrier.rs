//! Log-det barrier method for linear objectives over 4×4 Hermitian matrices
//! constrained by a handful of linear matrix inequalities.
//!
//! A block is S(W) = constant + sign·W or constant + sign·W^Γ, required to be
//! positive definite. The barrier t·Tr(CW) − Σ log det S(W) is self-concordant,
//! so damped Newton steps with length 1/(1+λ) never leave the feasible set in
//! exact arithmetic; the feasibility check below only guards against rounding.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{herm_eig, partial_transpose_b, CMat, ZERO};

const DIM: usize = 16;
type Vec16 = SVector<f64, DIM>;
type Mat16 = SMatrix<f64, DIM, DIM>;

const T_INITIAL: f64 = 1.0;
const T_GROWTH: f64 = 8.0;
const CENTERING_DECREMENT: f64 = 1e-10;
const MAX_CENTERING_STEPS: usize = 60;

#[derive(Clone, Debug)]
pub(crate) struct Block {
    pub constant: CMat,
    pub sign: f64,
    pub transposed: bool,
}

impl Block {
    pub fn new(constant: CMat, sign: f64, transposed: bool) -> Self {
        Self {
            constant,
            sign,
            transposed,
        }
    }

    pub fn eval(&self, w: &CMat) -> CMat {
        let w = if self.transposed {
            partial_transpose_b(w).expect("4x4")
        } else {
            w.clone()
        };
        &self.constant + &w.scale(self.sign)
    }
}

#[derive(Clone, Debug)]
pub(crate) struct BarrierOutcome {
    pub point: CMat,
    pub newton_steps: usize,
}

/// Orthonormal basis of 4×4 Hermitian matrices under Tr(AB).
pub(crate) fn hermitian_basis() -> Vec<CMat> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(DIM);
    for i in 0..4 {
        let mut e = CMat::zeros(4, 4);
        e[(i, i)] = Complex64::new(1.0, 0.0);
        basis.push(e);
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut e = CMat::zeros(4, 4);
            e[(i, j)] = Complex64::new(h, 0.0);
            e[(j, i)] = Complex64::new(h, 0.0);
            basis.push(e);
            let mut e = CMat::zeros(4, 4);
            e[(i, j)] = Complex64::new(0.0, h);
            e[(j, i)] = Complex64::new(0.0, -h);
            basis.push(e);
        }
    }
    basis
}

fn compose(basis: &[CMat], x: &Vec16) -> CMat {
    let mut out = CMat::zeros(4, 4);
    for (e, &c) in basis.iter().zip(x.iter()) {
        if c != 0.0 {
            out = &out + &e.scale(c);
        }
    }
    out
}

pub(crate) fn coordinates(basis: &[CMat], w: &CMat) -> Vec16 {
    Vec16::from_fn(|k, _| basis[k].trace_product(w))
}

fn inverse_if_pd(s: &CMat) -> Option<CMat> {
    let e = herm_eig(&s.hermitian_part()).ok()?;
    if e.values[0] <= 0.0 {
        return None;
    }
    let mut inv = CMat::zeros(4, 4);
    for k in 0..4 {
        let v = e.vector(k);
        let w = 1.0 / e.values[k];
        for i in 0..4 {
            for j in 0..4 {
                inv[(i, j)] += v[i] * v[j].conj() * w;
            }
        }
    }
    Some(inv)
}

fn trace_of_product(a: &CMat, b: &CMat) -> f64 {
    let mut s = ZERO;
    for i in 0..4 {
        for k in 0..4 {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s.re
}

/// Minimizes Tr(C W) over W with every block positive definite, starting from
/// the strictly feasible `start`, until blocks·4/t ≤ `gap_target`.
pub(crate) fn minimize(objective: &CMat, blocks: &[Block], start: &CMat, gap_target: f64) -> Result<BarrierOutcome> {
    let basis = hermitian_basis();
    let basis_pt: Vec<CMat> = basis.iter().map(|e| partial_transpose_b(e).expect("4x4")).collect();
    let c = coordinates(&basis, objective);
    let mut x = coordinates(&basis, start);
    let barrier_parameter = 4.0 * blocks.len() as f64;

    if blocks.iter().any(|b| inverse_if_pd(&b.eval(start)).is_none()) {
        return Err(Error::Inconsistent("barrier start point is not strictly feasible".into()));
    }

    let mut t = T_INITIAL;
    let mut newton_steps = 0;
    loop {
        for _ in 0..MAX_CENTERING_STEPS {
            let w = compose(&basis, &x);
            let mut grad = c * t;
            let mut hess = Mat16::zeros();
            for block in blocks {
                let inv = inverse_if_pd(&block.eval(&w))
                    .ok_or_else(|| Error::Inconsistent("iterate left the feasible set".into()))?;
                let dirs = if block.transposed { &basis_pt } else { &basis };
                let prods: Vec<CMat> = dirs.iter().map(|e| &inv * e).collect();
                for k in 0..DIM {
                    grad[k] -= block.sign * prods[k].trace().re;
                    for l in 0..=k {
                        let h = trace_of_product(&prods[k], &prods[l]);
                        hess[(k, l)] += h;
                        if l != k {
                            hess[(l, k)] += h;
                        }
                    }
                }
            }
            let step = newton_direction(&hess, &grad);
            let decrement2 = -grad.dot(&step);
            if !(decrement2 > CENTERING_DECREMENT) {
                break;
            }
            let lambda = decrement2.max(0.0).sqrt();
            let mut alpha = if lambda < 0.25 { 1.0 } else { 1.0 / (1.0 + lambda) };
            loop {
                let trial = x + step * alpha;
                let tw = compose(&basis, &trial);
                if blocks.iter().all(|b| inverse_if_pd(&b.eval(&tw)).is_some()) {
                    x = trial;
                    break;
                }
                alpha *= 0.5;
                if alpha < 1e-12 {
                    return Err(Error::Inconsistent("no feasible Newton step".into()));
                }
            }
            newton_steps += 1;
        }
        if barrier_parameter / t <= gap_target {
            break;
        }
        if t > 1e16 {
            return Err(Error::NoConvergence {
                what: "barrier method",
                iterations: newton_steps,
            });
        }
        t *= T_GROWTH;
    }
    Ok(BarrierOutcome {
        point: compose(&basis, &x),
        newton_steps,
    })
}

fn newton_direction(hess: &Mat16, grad: &Vec16) -> Vec16 {
    if let Some(ch) = hess.cholesky() {
        return -ch.solve(grad);
    }
    let eig = hess.symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let mut step = Vec16::zeros();
    for k in 0..DIM {
        let lam = eig.eigenvalues[k];
        if lam > 1e-14 * scale {
            let v = eig.eigenvectors.column(k);
            step -= v * (v.dot(grad) / lam);
        }
    }
    step
}

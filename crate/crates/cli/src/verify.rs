//! Built-in property suite over seeded random states.
//!
//! Every suite runs to completion unless it fails; the first failing case of
//! each suite is kept with enough data to replay it.

use qfidelity::fstar::{family_fstar, family_state, fstar_bounds, primal_feasibility, solve, DEFAULT_TOL};
use qfidelity::measures::{analyze, concurrence, is_entangled, min_pt_eigenvalue, negativity, singlet_fraction};
use qfidelity::normal_form::{apply_local, bell_offdiagonal_residual, marginal_defect, normal_form};
use qfidelity::qmat::{herm_eig, partial_transpose_a, partial_transpose_b, CMat, DensityMatrix, LocalOperator};
use qfidelity::random::{haar_unitary_2, hilbert_schmidt_state, rng, unit_norm_filter, StateRng};
use qfidelity::teleport::{average_fidelity, k_cost_direct, k_cost_transposed, lu_align, sphere_samples, teleport_channel};
use qfidelity::Result;
use rand::Rng;
use serde::Serialize;

use crate::statefile::{MatrixJson, StateFile};

pub const DEFAULT_STATES: usize = 200;

#[derive(Clone, Copy, Debug, Default)]
pub struct VerifyOptions {
    pub n_states: usize,
    pub seed: u64,
    /// Use the partial transpose on A in the K consistency check.
    pub inject_transpose_bug: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub check: String,
    pub detail: String,
    pub state: StateFile,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub filters: Vec<MatrixJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<Failure>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub n_states: usize,
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn failed_suites(&self) -> Vec<&'static str> {
        self.suites.iter().filter(|s| !s.passed).map(|s| s.name).collect()
    }
}

struct Suite {
    name: &'static str,
    cases: usize,
    failure: Option<Failure>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Self { name, cases: 0, failure: None }
    }

    fn failed(&self) -> bool {
        self.failure.is_some()
    }

    /// Records a check; returns false once the suite has failed.
    fn check(&mut self, ok: bool, check: &str, rho: &DensityMatrix, detail: impl FnOnce() -> String) -> bool {
        self.check_with(ok, check, rho, &[], detail)
    }

    fn check_with(
        &mut self,
        ok: bool,
        check: &str,
        rho: &DensityMatrix,
        filters: &[&CMat],
        detail: impl FnOnce() -> String,
    ) -> bool {
        if self.failure.is_some() {
            return false;
        }
        if !ok {
            self.failure = Some(Failure {
                check: check.into(),
                detail: detail(),
                state: StateFile::from_density(rho),
                filters: filters.iter().map(|m| MatrixJson::from_cmat(m)).collect(),
            });
        }
        ok
    }

    /// Turns an unexpected library error into a failure of this suite.
    fn ok<T>(&mut self, r: Result<T>, what: &str, rho: &DensityMatrix) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.check(false, what, rho, || e.to_string());
                None
            }
        }
    }

    fn finish(self) -> SuiteReport {
        SuiteReport {
            name: self.name,
            cases: self.cases,
            passed: self.failure.is_none(),
            failure: self.failure,
        }
    }
}

fn random_state(r: &mut StateRng, k: usize) -> DensityMatrix {
    hilbert_schmidt_state(r, 1 + k % 4).expect("rank in 1..=4")
}

fn random_qubit(r: &mut StateRng) -> [num_complex::Complex64; 2] {
    let u = haar_unitary_2(r);
    [u[(0, 0)], u[(1, 0)]]
}

/// Convex mixture of random product pure states.
fn random_product_mixture(r: &mut StateRng) -> DensityMatrix {
    let terms = r.random_range(1..=4);
    let mut m = CMat::zeros(4, 4);
    for _ in 0..terms {
        let (a, b) = (random_qubit(r), random_qubit(r));
        let v = [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]];
        m = &m + &CMat::outer(&v).scale(r.random::<f64>() + 1e-3);
    }
    DensityMatrix::from_unnormalized(&m).expect("nonzero mixture")
}

/// Bell-diagonal state with random weights, rotated into the magic-basis frame.
fn random_bell_diagonal(r: &mut StateRng) -> DensityMatrix {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let bell = [
        [s2, 0.0, 0.0, s2],
        [s2, 0.0, 0.0, -s2],
        [0.0, s2, s2, 0.0],
        [0.0, s2, -s2, 0.0],
    ];
    let mut m = CMat::zeros(4, 4);
    for v in bell {
        let v = v.map(|x| num_complex::Complex64::new(x, 0.0));
        m = &m + &CMat::outer(&v).scale(r.random::<f64>());
    }
    DensityMatrix::from_unnormalized(&m).expect("nonzero weights")
}

fn suite_partial_transpose(n: usize, r: &mut StateRng) -> SuiteReport {
    let mut s = Suite::new("partial-transpose");
    for k in 0..n * 50 {
        let rho = random_state(r, k);
        s.cases += 1;
        let Some(pt) = s.ok(partial_transpose_b(rho.matrix()), "transpose", &rho) else { break };
        let Some(back) = s.ok(partial_transpose_b(&pt), "transpose", &rho) else { break };
        if !s.check(back == *rho.matrix(), "involution", &rho, || "Γ∘Γ differs from the identity".into()) {
            break;
        }
        let Some(eig) = s.ok(herm_eig(&pt), "eigendecomposition", &rho) else { break };
        let sum: f64 = eig.values.iter().sum();
        if !s.check((sum - 1.0).abs() < 1e-10, "trace", &rho, || format!("eigenvalues of ρ^Γ sum to {sum}")) {
            break;
        }
        if !s.check(eig.values[1] > -1e-12, "single-negative", &rho, || format!("spectrum {:?}", eig.values)) {
            break;
        }
    }
    s.finish()
}

fn suite_measures(n: usize, r: &mut StateRng) -> SuiteReport {
    let mut s = Suite::new("measures");
    for k in 0..n * 10 {
        let rho = random_state(r, k);
        s.cases += 1;
        let Some(m) = s.ok(analyze(&rho), "analyze", &rho) else { break };
        let (f, c, neg) = (m.singlet_fraction, m.concurrence, m.negativity);
        s.check(f <= (1.0 + c) / 2.0 + 1e-9, "F <= (1+C)/2", &rho, || format!("F {f}, C {c}"));
        s.check(f <= (1.0 + neg) / 2.0 + 1e-9, "F <= (1+N)/2", &rho, || format!("F {f}, N {neg}"));
        let Some(lmin) = s.ok(min_pt_eigenvalue(&rho), "pt eigenvalue", &rho) else { break };
        if lmin.abs() > 1e-6 {
            s.check((c > 1e-9) == m.entangled, "C > 0 iff entangled", &rho, || format!("C {c}, λmin {lmin}"));
        }
        let (u, v) = (haar_unitary_2(r), haar_unitary_2(r));
        let (rot, _) = apply_local(rho.matrix(), &u, &v);
        let Some(rot) = s.ok(DensityMatrix::from_unnormalized(&rot), "rotate", &rho) else { break };
        let Some((fr, _)) = s.ok(singlet_fraction(&rot), "singlet fraction", &rho) else { break };
        s.check((fr - f).abs() < 1e-9, "LU invariance", &rho, || format!("F {f} vs rotated {fr}"));
        if s.failed() {
            break;
        }
    }
    for _ in 0..n {
        let rho = random_product_mixture(r);
        s.cases += 1;
        let Some(c) = s.ok(concurrence(&rho), "concurrence", &rho) else { break };
        let Some(neg) = s.ok(negativity(&rho), "negativity", &rho) else { break };
        if !s.check(c < 1e-9 && neg < 1e-9, "separable mixture", &rho, || format!("C {c}, N {neg}")) {
            break;
        }
    }
    for _ in 0..n {
        let rho = random_bell_diagonal(r);
        s.cases += 1;
        let Some(m) = s.ok(analyze(&rho), "analyze", &rho) else { break };
        let (f, c) = (m.singlet_fraction, m.concurrence);
        let want = if m.entangled { (1.0 + c) / 2.0 } else { f };
        if !s.check((f - want).abs() < 1e-9, "Bell-diagonal equality", &rho, || format!("F {f}, C {c}")) {
            break;
        }
    }
    s.finish()
}

fn suite_k_cost(n: usize, r: &mut StateRng, inject_bug: bool) -> SuiteReport {
    let mut s = Suite::new("k-cost-consistency");
    let transpose = if inject_bug { partial_transpose_a } else { partial_transpose_b };
    for k in 0..n * 50 {
        let rho = random_state(r, k);
        let (a, b) = (unit_norm_filter(r), unit_norm_filter(r));
        s.cases += 1;
        let direct = k_cost_direct(&rho, &a, &b);
        let Some(via_pt) = s.ok(k_cost_transposed(&rho, &a, &b, transpose), "k-cost", &rho) else { break };
        let ok = (direct - via_pt).abs() <= 1e-10;
        if !s.check_with(ok, "direct vs transposed form", &rho, &[a.matrix(), b.matrix()], || {
            format!("direct {direct}, transposed {via_pt}")
        }) {
            break;
        }
    }
    s.finish()
}

fn suite_normal_form(n: usize, r: &mut StateRng) -> SuiteReport {
    let mut s = Suite::new("normal-form");
    for _ in 0..n {
        let rho = hilbert_schmidt_state(r, 4).expect("rank 4");
        s.cases += 1;
        let Some(nf) = s.ok(normal_form(&rho), "normal form", &rho) else { break };
        let Some(entangled) = s.ok(is_entangled(&rho), "entanglement", &rho) else { break };
        s.check(nf.entangled == entangled, "entangled iff normal form entangled", &rho, || {
            format!("input {entangled}, normal form {}", nf.entangled)
        });
        let offdiag = bell_offdiagonal_residual(&nf.rho_nf);
        let marg = marginal_defect(&nf.rho_nf);
        s.check(offdiag < 1e-8 && marg < 1e-8, "Bell diagonal", &rho, || {
            format!("off-diagonal {offdiag:e}, marginal defect {marg:e}")
        });
        let (filtered, _) = apply_local(rho.matrix(), nf.filter_a.matrix(), nf.filter_b.matrix());
        let Some(filtered) = s.ok(DensityMatrix::from_unnormalized(&filtered), "filter", &rho) else { break };
        let diff = filtered.matrix().max_abs_diff(nf.rho_nf.matrix());
        s.check_with(diff < 1e-8, "filter accumulation", &rho, &[nf.filter_a.matrix(), nf.filter_b.matrix()], || {
            format!("max deviation {diff:e}")
        });
        let Some(again) = s.ok(normal_form(&nf.rho_nf), "normal form of normal form", &rho) else { break };
        let sorted = |w: [f64; 4]| {
            let mut w = w;
            w.sort_by(|x, y| y.total_cmp(x));
            w
        };
        let (w1, w2) = (sorted(nf.bell_coefficients), sorted(again.bell_coefficients));
        let idem = w1.iter().zip(&w2).all(|(x, y)| (x - y).abs() < 1e-7);
        s.check(idem, "idempotence", &rho, || format!("{w1:?} vs {w2:?}"));
        if entangled {
            s.check(nf.fidelity_nf > 0.5, "fidelity above 1/2", &rho, || format!("{}", nf.fidelity_nf));
            let (Some(c0), Some(c1)) = (
                s.ok(concurrence(&rho), "concurrence", &rho),
                s.ok(concurrence(&nf.rho_nf), "concurrence", &rho),
            ) else {
                break;
            };
            s.check(c1 >= c0 - 1e-9, "concurrence gain", &rho, || format!("{c0} -> {c1}"));
            let c = teleport_channel(&nf.rho_nf).c;
            let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
            s.check(norm < 1e-9, "unital channel", &rho, || format!("|c| = {norm:e}"));
        }
        if s.failed() {
            break;
        }
    }
    s.finish()
}

fn suite_fstar(n: usize, r: &mut StateRng) -> SuiteReport {
    let mut s = Suite::new("fstar");
    for k in 0..n {
        let rho = random_state(r, k);
        s.cases += 1;
        let Some((sol, dual)) = s.ok(solve(&rho, DEFAULT_TOL), "solve", &rho) else { break };
        let Some((f, _)) = s.ok(singlet_fraction(&rho), "singlet fraction", &rho) else { break };
        let Some(entangled) = s.ok(is_entangled(&rho), "entanglement", &rho) else { break };
        let Some(feas) = s.ok(primal_feasibility(&sol.x_opt), "feasibility", &rho) else { break };
        let fs = sol.fstar;
        s.check((fs - dual.g).abs() < 1e-6, "strong duality", &rho, || format!("primal {fs}, dual {}", dual.g));
        s.check(fs >= f - 1e-8, "F* >= F", &rho, || format!("F* {fs}, F {f}"));
        s.check(fs >= 0.5 - 1e-10, "F* >= 1/2", &rho, || format!("F* {fs}"));
        s.check((fs > 0.5 + 1e-7) == entangled, "F* > 1/2 iff entangled", &rho, || {
            format!("F* {fs}, entangled {entangled}")
        });
        s.check(feas.pt_lower <= 1e-8, "X^Γ >= -I/2", &rho, || format!("violation {:e}", feas.pt_lower));
        if entangled {
            let Some(b) = s.ok(fstar_bounds(&rho), "bounds", &rho) else { break };
            s.check(b.lower - 1e-7 <= fs && fs <= b.upper + 1e-7, "sandwich", &rho, || {
                format!("{} <= {fs} <= {}", b.lower, b.upper)
            });
            // Every concrete filter is a lower bound.
            for _ in 0..20 {
                let a = unit_norm_filter(r);
                let kv = k_cost_direct(&rho, &a, &LocalOperator::identity());
                if !s.check_with(kv <= fs + 1e-8, "protocol below F*", &rho, &[a.matrix()], || {
                    format!("K {kv} > F* {fs}")
                }) {
                    break;
                }
            }
        }
        if s.failed() {
            break;
        }
    }
    s.finish()
}

fn suite_family() -> SuiteReport {
    let mut s = Suite::new("family-sweep");
    for f in (35..=95).step_by(5).map(|k| k as f64 / 100.0) {
        let rho = family_state(f).expect("in range");
        s.cases += 1;
        let Some((sol, _)) = s.ok(solve(&rho, DEFAULT_TOL), "solve", &rho) else { break };
        let want = family_fstar(f).expect("in range");
        if !s.check((sol.fstar - want).abs() < 1e-6, "closed form", &rho, || {
            format!("F = {f}: solver {}, closed form {want}", sol.fstar)
        }) {
            break;
        }
    }
    s.finish()
}

fn suite_teleport(n: usize, r: &mut StateRng) -> SuiteReport {
    let mut s = Suite::new("teleport");
    for k in 0..n {
        let rho = random_state(r, k);
        s.cases += 1;
        let Some((f, _)) = s.ok(singlet_fraction(&rho), "singlet fraction", &rho) else { break };
        let Some((aligned, _, _)) = s.ok(lu_align(&rho), "alignment", &rho) else { break };
        let avg = average_fidelity(&aligned);
        let want = (2.0 * f + 1.0) / 3.0;
        s.check((avg - want).abs() < 1e-9, "LU average fidelity", &rho, || format!("{avg} vs (2F+1)/3 = {want}"));
        let ch = teleport_channel(&rho);
        for v in sphere_samples(64, k as u64) {
            let o = ch.apply(&v);
            let norm = o.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !s.check(norm <= 1.0 + 1e-9, "output in Bloch ball", &rho, || format!("input {v:?}, output norm {norm}")) {
                break;
            }
        }
        if s.failed() {
            break;
        }
    }
    s.finish()
}

pub fn run(opts: VerifyOptions) -> VerifyReport {
    let n = opts.n_states.max(1);
    // Each suite has its own stream so changing one does not shift the others.
    let stream = |k: u64| rng(opts.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(k));
    let suites = vec![
        suite_partial_transpose(n, &mut stream(1)),
        suite_measures(n, &mut stream(2)),
        suite_k_cost(n, &mut stream(3), opts.inject_transpose_bug),
        suite_normal_form(n, &mut stream(4)),
        suite_fstar(n.div_ceil(2), &mut stream(5)),
        suite_family(),
        suite_teleport(n, &mut stream(6)),
    ];
    VerifyReport {
        n_states: n,
        seed: opts.seed,
        passed: suites.iter().all(|s| s.passed),
        suites,
    }
}

//! Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.

use std::process::ExitCode;
use std::time::Instant;

use qfidelity::fstar::{
    dual_violation, family_fstar, family_state, fstar_bounds, primal_feasibility, solve, solve_primal,
    FstarSolution, DEFAULT_TOL,
};
use qfidelity::measures::{concurrence, is_entangled, singlet_fraction};
use qfidelity::normal_form::{bell_offdiagonal_residual, marginal_defect, normal_form};
use qfidelity::qmat::{herm_apply, phi_plus, validate_density, CMat, DensityMatrix, LocalOperator};
use qfidelity::random::{contraction, ginibre, hilbert_schmidt_state, rng, unit_norm_filter, StateRng};
use qfidelity::teleport::{average_fidelity, k_cost, lu_align, preprocess, Preprocessing};
use rand::Rng;

/// Tracks the unenforced constraint X^Γ ≥ −I/2 over every solve in the run.
#[derive(Default)]
struct Tracker {
    solves: usize,
    worst_pt_lower: f64,
}

impl Tracker {
    fn record(&mut self, sol: &FstarSolution) -> f64 {
        let feas = primal_feasibility(&sol.x_opt).expect("feasibility");
        self.solves += 1;
        self.worst_pt_lower = self.worst_pt_lower.max(feas.pt_lower);
        feas.worst()
    }
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn family_points(lo: u32, hi: u32) -> impl Iterator<Item = f64> {
    (lo..=hi).step_by(5).map(|k| k as f64 / 100.0)
}

fn criterion_1(tracker: &mut Tracker) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for f in family_points(35, 95) {
        let sol = solve_primal(&family_state(f).unwrap(), DEFAULT_TOL).unwrap();
        tracker.record(&sol);
        let want = if f <= 0.65 { 0.5 * (1.0 + f * f / (4.0 * (1.0 - f))) } else { f };
        debug_assert_eq!(want, family_fstar(f).unwrap());
        worst = worst.max((sol.fstar - want).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-6 && secs < 10.0,
        format!("max |F* - closed form| = {worst:.2e}, {secs:.2} s"),
    )
}

fn criterion_2(tracker: &mut Tracker) -> Outcome {
    let mut worst: f64 = 0.0;
    for f in [0.34, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.66] {
        let sol = solve_primal(&family_state(f).unwrap(), DEFAULT_TOL).unwrap();
        tracker.record(&sol);
        let a = sol.filter_a.expect("entangled state has a filter").phase_fixed();
        let want = [f / (2.0 * (1.0 - f)), 1.0];
        // Normalize on the largest entry, which carries the fixed phase.
        let scale = a[(1, 1)];
        let entries = [a[(0, 0)] / scale, a[(0, 1)] / scale, a[(1, 0)] / scale, a[(1, 1)] / scale];
        let rel = ((entries[0].re - want[0]).abs() + entries[0].im.abs()) / want[0];
        let off = entries[1].norm().max(entries[2].norm()) / want[0];
        worst = worst.max(rel).max(off).max((entries[3] - 1.0).norm());
    }
    outcome(worst < 1e-4, format!("max relative entry error = {worst:.2e}"))
}

fn criterion_3(tracker: &mut Tracker) -> Outcome {
    let mut r = rng(3);
    let (mut gap, mut infeas): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let rho = hilbert_schmidt_state(&mut r, 4).unwrap();
        let (sol, dual) = solve(&rho, DEFAULT_TOL).unwrap();
        infeas = infeas.max(tracker.record(&sol));
        infeas = infeas.max(dual_violation(&rho, &dual.z).unwrap());
        gap = gap.max((sol.fstar - dual.g).abs());
    }
    outcome(
        gap < 1e-6 && infeas <= 1e-8,
        format!("max |primal - dual| = {gap:.2e}, max constraint violation = {infeas:.2e}"),
    )
}

fn criterion_4(tracker: &mut Tracker) -> Outcome {
    let mut r = rng(4);
    let (mut npt, mut ppt, mut bad) = (0, 0, 0);
    for k in 0..500 {
        let rho = hilbert_schmidt_state(&mut r, 1 + k % 4).unwrap();
        let sol = solve_primal(&rho, DEFAULT_TOL).unwrap();
        tracker.record(&sol);
        if is_entangled(&rho).unwrap() {
            npt += 1;
            bad += usize::from(!(sol.fstar > 0.5 + 1e-7));
        } else {
            ppt += 1;
            bad += usize::from((sol.fstar - 0.5).abs() > 1e-7);
        }
    }
    outcome(
        bad == 0 && ppt > 0 && npt > 0,
        format!("{npt} NPT, {ppt} PPT, {bad} violations"),
    )
}

fn random_entangled(r: &mut StateRng, rank: usize) -> DensityMatrix {
    loop {
        let rho = hilbert_schmidt_state(r, rank).unwrap();
        if is_entangled(&rho).unwrap() {
            return rho;
        }
    }
}

fn criterion_5(tracker: &mut Tracker) -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = f64::INFINITY;
    for k in 0..500 {
        let rho = random_entangled(&mut r, 1 + k % 4);
        let sol = solve_primal(&rho, DEFAULT_TOL).unwrap();
        tracker.record(&sol);
        let b = fstar_bounds(&rho).unwrap();
        worst = worst.min(sol.fstar - b.lower).min(b.upper - sol.fstar);
    }
    outcome(worst >= -1e-7, format!("smallest slack to a bound = {worst:.2e}"))
}

const ORACLE_SAMPLES: usize = 100_000;

fn polar_unitary(m: &CMat) -> qfidelity::Result<LocalOperator> {
    let inv_sqrt = herm_apply(&(&m.adjoint() * m), |x| 1.0 / x.max(1e-300).sqrt())?;
    LocalOperator::normalized(m * &inv_sqrt)
}

/// Best k_cost(ρ, A, I) over random unit-norm filters, then a shrinking
/// random local search around the best sample.
fn brute_force_k(rho: &DensityMatrix, r: &mut StateRng) -> (f64, f64) {
    let id = LocalOperator::identity();
    let mut best = f64::NEG_INFINITY;
    let mut best_a = id.clone();
    let mut overall = f64::NEG_INFINITY;
    for _ in 0..ORACLE_SAMPLES {
        let a = if r.random::<f64>() < 0.5 { unit_norm_filter(r) } else { contraction(r) };
        let k = k_cost(rho, &a, &id).unwrap();
        overall = overall.max(k);
        if k > best {
            best = k;
            best_a = a;
        }
    }
    // Optima often sit on the unitary boundary of the unit ball, which plain
    // perturb-and-rescale moves almost never hit, so every perturbation is
    // also tried after projecting onto its unitary polar factor.
    let mut step = 0.1;
    while step > 1e-10 {
        let mut improved = false;
        for _ in 0..60 {
            let moved = best_a.matrix() + &ginibre(r, 2, 2).scale(step);
            let candidates = [LocalOperator::normalized(moved.clone()), polar_unitary(&moved)];
            for trial in candidates.into_iter().flatten() {
                let k = k_cost(rho, &trial, &id).unwrap();
                overall = overall.max(k);
                if k > best {
                    best = k;
                    best_a = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (best, overall)
}

fn criterion_6(tracker: &mut Tracker) -> Outcome {
    let mut r = rng(6);
    let (mut worst_reach, mut worst_excess): (f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for k in 0..25 {
        let rho = random_entangled(&mut r, 2 + k % 3);
        let sol = solve_primal(&rho, DEFAULT_TOL).unwrap();
        tracker.record(&sol);
        let (best, overall) = brute_force_k(&rho, &mut r);
        worst_reach = worst_reach.max(sol.fstar - best);
        worst_excess = worst_excess.max(overall - sol.fstar);
    }
    outcome(
        worst_reach <= 1e-3 && worst_excess <= 1e-8,
        format!("max shortfall F* - best = {worst_reach:.2e}, max excess over F* = {worst_excess:.2e}"),
    )
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut failures = 0;
    for k in 0..10_000 {
        let rho = hilbert_schmidt_state(&mut r, 1 + k % 4).unwrap();
        let (a, b) = (contraction(&mut r), contraction(&mut r));
        failures += usize::from(k_cost(&rho, &a, &b).is_err());
    }
    outcome(failures == 0, format!("{failures} of 10000 triples disagree beyond 1e-10"))
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let rho = hilbert_schmidt_state(&mut r, 1 + k % 4).unwrap();
        let (f, _) = singlet_fraction(&rho).unwrap();
        let (aligned, _, _) = lu_align(&rho).unwrap();
        worst = worst.max((average_fidelity(&aligned) - (2.0 * f + 1.0) / 3.0).abs());
    }
    let bell = validate_density(&CMat::outer(&phi_plus())).unwrap();
    let f_bell = average_fidelity(&bell);
    let f_mixed = average_fidelity(&DensityMatrix::maximally_mixed());
    let locc = preprocess(&family_state(0.4).unwrap(), Preprocessing::Locc).unwrap();
    let f_locc = average_fidelity(&locc);
    let pass = worst < 1e-9
        && (f_bell - 1.0).abs() < 1e-12
        && (f_mixed - 0.5).abs() < 1e-12
        && (f_locc - 31.0 / 45.0).abs() < 1e-6;
    outcome(
        pass,
        format!("max identity error = {worst:.2e}, Bell {f_bell:.12}, I/4 {f_mixed:.12}, LOCC rho(0.4) {f_locc:.9}"),
    )
}

fn criterion_9() -> Outcome {
    let mut r = rng(9);
    let (mut offdiag, mut marg, mut fid, mut conc): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, f64::INFINITY);
    let mut above_half = true;
    for _ in 0..200 {
        let rho = random_entangled(&mut r, 4);
        let nf = normal_form(&rho).unwrap();
        let c_nf = concurrence(&nf.rho_nf).unwrap();
        offdiag = offdiag.max(bell_offdiagonal_residual(&nf.rho_nf));
        marg = marg.max(marginal_defect(&nf.rho_nf));
        fid = fid.max((nf.fidelity_nf - (1.0 + c_nf) / 2.0).abs());
        conc = conc.min(c_nf - concurrence(&rho).unwrap());
        above_half &= nf.fidelity_nf > 0.5;
    }
    let pass = offdiag < 1e-8 && marg < 1e-8 && fid < 1e-8 && above_half && conc >= -1e-9;
    outcome(
        pass,
        format!(
            "off-diagonal {offdiag:.2e}, marginal {marg:.2e}, fidelity identity {fid:.2e}, min C gain {conc:.2e}, all above 1/2: {above_half}"
        ),
    )
}

fn criterion_10(tracker: &Tracker) -> Outcome {
    outcome(
        tracker.worst_pt_lower <= 1e-8,
        format!(
            "{} solves, worst violation of X^Γ >= -I/2 = {:.2e}",
            tracker.solves, tracker.worst_pt_lower
        ),
    )
}

fn main() -> ExitCode {
    let mut tracker = Tracker::default();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "family F* reproduction", criterion_1(&mut tracker)));
    results.push((2, "optimal filter reproduction", criterion_2(&mut tracker)));
    results.push((3, "strong duality", criterion_3(&mut tracker)));
    results.push((4, "entanglement dichotomy", criterion_4(&mut tracker)));
    results.push((5, "bound sandwich", criterion_5(&mut tracker)));
    results.push((6, "filter oracle", criterion_6(&mut tracker)));
    results.push((7, "filter fidelity form consistency", criterion_7()));
    results.push((8, "teleportation identity", criterion_8()));
    results.push((9, "normal form", criterion_9()));
    results.push((10, "automatic constraint", criterion_10(&tracker)));

    let mut failed = 0;
    for (n, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} [{tag}] {name}: {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

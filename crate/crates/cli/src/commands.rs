//! Command implementations; each returns a serializable report.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use qfidelity::fstar::{family_filter, family_fstar, family_state, fstar_bounds, solve, verify_rank_one, RANK_ONE_TOL};
use qfidelity::measures::analyze;
use qfidelity::normal_form::normal_form_with;
use qfidelity::qmat::{DensityMatrix, LocalOperator};
use qfidelity::random::{hilbert_schmidt_state, rng};
use qfidelity::teleport::{bloch_image, Preprocessing};
use qfidelity::Error;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::statefile::{write_state, MatrixJson, StateFile};

/// Smallest singular value above which a unit-norm filter counts as a local unitary.
pub const TRIVIAL_FILTER_TOL: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VectorJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorJson {
    fn from_slice(v: &[Complex64]) -> Self {
        Self {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub singlet_fraction: f64,
    pub achieving_me_state: VectorJson,
    pub concurrence: f64,
    pub negativity: f64,
    pub entangled: bool,
    pub near_boundary: bool,
    pub teleport_fidelity: f64,
}

pub fn cmd_analyze(rho: &DensityMatrix) -> CliResult<AnalyzeReport> {
    let r = analyze(rho).map_err(CliError::Invalid)?;
    Ok(AnalyzeReport {
        singlet_fraction: r.singlet_fraction,
        achieving_me_state: VectorJson::from_slice(r.achieving_me_state.as_slice()),
        concurrence: r.concurrence,
        negativity: r.negativity,
        entangled: r.entangled,
        near_boundary: r.near_boundary,
        teleport_fidelity: r.teleport_fidelity,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsJson {
    pub lower: f64,
    pub tight_lower: f64,
    pub upper: f64,
    pub c_vminus: f64,
    pub separable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FstarReport {
    pub fstar: f64,
    pub teleport_fidelity: f64,
    pub dual_objective: f64,
    pub duality_gap: f64,
    /// Alice's filter, unit operator norm; absent for separable states.
    pub filter_a: Option<MatrixJson>,
    /// True when no filter is needed (separable, or the filter is a local unitary).
    pub filter_trivial: bool,
    pub x_opt: MatrixJson,
    pub rank_gap: f64,
    pub rank_one: bool,
    pub mixing_p: f64,
    pub z: MatrixJson,
    pub rho_z: Option<MatrixJson>,
    pub rho_mix: MatrixJson,
    pub bounds: BoundsJson,
    pub iterations: usize,
}

pub fn is_trivial_filter(filter: Option<&LocalOperator>) -> bool {
    filter.is_none_or(|a| a.singular_values()[1] > 1.0 - TRIVIAL_FILTER_TOL)
}

pub fn cmd_fstar(rho: &DensityMatrix, tol: f64) -> CliResult<FstarReport> {
    let (sol, dual) = solve(rho, tol).map_err(|e| match e {
        Error::OutOfRange { .. } => CliError::Invalid(e),
        e => CliError::Solver(e),
    })?;
    let bounds = fstar_bounds(rho).map_err(CliError::Solver)?;
    let rank_one = verify_rank_one(&sol.x_opt, RANK_ONE_TOL).map_err(CliError::Solver)?;
    Ok(FstarReport {
        fstar: sol.fstar,
        teleport_fidelity: sol.teleport_fidelity(),
        dual_objective: sol.dual_objective,
        duality_gap: sol.duality_gap,
        filter_trivial: is_trivial_filter(sol.filter_a.as_ref()),
        filter_a: sol.filter_a.as_ref().map(|a| MatrixJson::from_cmat(&a.phase_fixed())),
        x_opt: MatrixJson::from_cmat(&sol.x_opt),
        rank_gap: sol.rank_gap,
        rank_one,
        mixing_p: dual.mixing_p,
        z: MatrixJson::from_cmat(&dual.z),
        rho_z: dual.rho_z.as_ref().map(|r| MatrixJson::from_cmat(r.matrix())),
        rho_mix: MatrixJson::from_cmat(dual.rho_mix.matrix()),
        bounds: BoundsJson {
            lower: bounds.lower,
            tight_lower: bounds.tight_lower,
            upper: bounds.upper,
            c_vminus: bounds.c_vminus,
            separable: bounds.separable,
        },
        iterations: sol.iterations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalFormReport {
    pub bell_coefficients: [f64; 4],
    pub fidelity_nf: f64,
    pub success_prob: f64,
    pub entangled: bool,
    pub filter_a: MatrixJson,
    pub filter_b: MatrixJson,
    pub rho_nf: MatrixJson,
    pub iterations: usize,
}

fn normal_form_error(e: Error) -> CliError {
    match e {
        Error::DegenerateMarginal(_) | Error::NoConvergence { .. } | Error::ZeroOperator(_) => {
            CliError::Degenerate(e)
        }
        Error::OutOfRange { .. } => CliError::Invalid(e),
        e => CliError::Solver(e),
    }
}

pub fn cmd_normal_form(rho: &DensityMatrix, tol: f64) -> CliResult<NormalFormReport> {
    let nf = normal_form_with(rho, tol, qfidelity::normal_form::DEFAULT_MAX_ITER).map_err(normal_form_error)?;
    Ok(NormalFormReport {
        bell_coefficients: nf.bell_coefficients,
        fidelity_nf: nf.fidelity_nf,
        success_prob: nf.success_prob,
        entangled: nf.entangled,
        filter_a: MatrixJson::from_cmat(nf.filter_a.matrix()),
        filter_b: MatrixJson::from_cmat(nf.filter_b.matrix()),
        rho_nf: MatrixJson::from_cmat(nf.rho_nf.matrix()),
        iterations: nf.iterations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BlochSummary {
    pub mode: String,
    pub n_samples: usize,
    pub seed: u64,
    pub m: [[f64; 3]; 3],
    pub c: [f64; 3],
    pub avg_fidelity: f64,
}

pub fn mode_name(mode: Preprocessing) -> &'static str {
    match mode {
        Preprocessing::Lu => "LU",
        Preprocessing::Locc => "LOCC",
        Preprocessing::Slocc => "SLOCC",
    }
}

/// Sidecar path for a CSV output: the same path with a `.json` extension.
pub fn sidecar_path(out: &Path) -> CliResult<PathBuf> {
    if out.extension().is_some_and(|e| e == "json") {
        return Err(CliError::Invalid(Error::Inconsistent(
            "the CSV output path must not end in .json (reserved for the summary)".into(),
        )));
    }
    Ok(out.with_extension("json"))
}

/// Writes `nx,ny,nz,ox,oy,oz` rows plus a JSON summary next to `out`.
pub fn cmd_bloch_image(
    rho: &DensityMatrix,
    mode: Preprocessing,
    n: usize,
    seed: u64,
    out: &Path,
) -> CliResult<BlochSummary> {
    let sidecar = sidecar_path(out)?;
    let image = bloch_image(rho, mode, n, seed).map_err(|e| match (mode, e) {
        (_, e @ Error::OutOfRange { .. }) => CliError::Invalid(e),
        (Preprocessing::Slocc, e) => normal_form_error(e),
        (_, e) => CliError::Solver(e),
    })?;
    let mut csv = String::from("nx,ny,nz,ox,oy,oz\n");
    for (input, output) in &image.samples {
        let row: Vec<String> = input.iter().chain(output).map(|x| format!("{x:.16e}")).collect();
        writeln!(csv, "{}", row.join(",")).expect("write to string");
    }
    fs::write(out, csv).map_err(CliError::io(out))?;
    let summary = BlochSummary {
        mode: mode_name(mode).into(),
        n_samples: n,
        seed,
        m: image.m,
        c: image.c,
        avg_fidelity: image.avg_fidelity,
    };
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    fs::write(&sidecar, text + "\n").map_err(CliError::io(&sidecar))?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct RandomReport {
    pub count: usize,
    pub rank: usize,
    pub seed: u64,
    pub ensemble: &'static str,
    pub entangled: usize,
    pub files: Vec<PathBuf>,
}

/// Writes `count` Hilbert–Schmidt states of the given rank as `state_NNNN.json`.
pub fn cmd_random(count: usize, rank: usize, seed: u64, out_dir: &Path) -> CliResult<RandomReport> {
    let mut r = rng(seed);
    fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    let mut files = Vec::with_capacity(count);
    let mut entangled = 0;
    for k in 0..count {
        let rho = hilbert_schmidt_state(&mut r, rank).map_err(CliError::Invalid)?;
        entangled += usize::from(qfidelity::measures::is_entangled(&rho).map_err(CliError::Invalid)?);
        let path = out_dir.join(format!("state_{k:04}.json"));
        write_state(&path, &rho)?;
        files.push(path);
    }
    Ok(RandomReport {
        count,
        rank,
        seed,
        ensemble: "hilbert-schmidt",
        entangled,
        files,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub f: f64,
    pub fstar: f64,
    pub teleport_fidelity: f64,
    pub filter_a: MatrixJson,
    pub filter_trivial: bool,
    pub state: StateFile,
}

/// The mixture F|ψ+⟩⟨ψ+| + (1−F)|01⟩⟨01| with its closed-form optimum.
pub fn cmd_family(f: f64, out: Option<&Path>) -> CliResult<FamilyReport> {
    let rho = family_state(f).map_err(CliError::Invalid)?;
    let fstar = family_fstar(f).map_err(CliError::Invalid)?;
    let filter = family_filter(f).map_err(CliError::Invalid)?;
    if let Some(path) = out {
        write_state(path, &rho)?;
    }
    Ok(FamilyReport {
        f,
        fstar,
        teleport_fidelity: (2.0 * fstar + 1.0) / 3.0,
        filter_a: MatrixJson::from_cmat(filter.filter.matrix()),
        filter_trivial: filter.trivial,
        state: StateFile::from_density(&rho),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use qfidelity::qmat::{phi_plus, validate_density, CMat};

    #[test]
    fn family_fstar_report() {
        let rho = family_state(0.4).unwrap();
        let r = cmd_fstar(&rho, 1e-8).unwrap();
        assert!((r.fstar - 8.0 / 15.0).abs() < 1e-6);
        assert!(!r.filter_trivial && r.rank_one);
        let a = r.filter_a.unwrap();
        assert!((a.re[0][0] / a.re[1][1] - 1.0 / 3.0).abs() < 1e-5);
        let r = cmd_fstar(&family_state(0.8).unwrap(), 1e-8).unwrap();
        assert!((r.fstar - 0.8).abs() < 1e-6);
        assert!(r.filter_trivial, "{:?}", r.filter_a);
    }

    #[test]
    fn separable_fstar_report() {
        let r = cmd_fstar(&DensityMatrix::maximally_mixed(), 1e-8).unwrap();
        assert_eq!(r.fstar, 0.5);
        assert_eq!(r.mixing_p, 0.0);
        assert!(r.filter_a.is_none() && r.filter_trivial);
    }

    #[test]
    fn analyze_bell() {
        let bell = validate_density(&CMat::outer(&phi_plus())).unwrap();
        let r = cmd_analyze(&bell).unwrap();
        for x in [r.singlet_fraction, r.concurrence, r.negativity, r.teleport_fidelity] {
            assert!((x - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn product_state_normal_form_is_degenerate() {
        let mut m = CMat::zeros(4, 4);
        m[(0, 0)] = Complex64::new(1.0, 0.0);
        let rho = validate_density(&m).unwrap();
        let err = cmd_normal_form(&rho, 1e-10).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("a/b.csv")).unwrap(), PathBuf::from("a/b.json"));
        assert!(sidecar_path(Path::new("b.json")).is_err());
    }
}

//! The mixture F|ψ+⟩⟨ψ+| + (1−F)|01⟩⟨01| and its closed-form optimum.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qmat::{phi_plus, validate_density, CMat, DensityMatrix, LocalOperator};

fn check_range(f: f64) -> Result<()> {
    if !(1.0 / 3.0..=1.0).contains(&f) {
        return Err(Error::OutOfRange {
            name: "F",
            value: f,
            lo: 1.0 / 3.0,
            hi: 1.0,
        });
    }
    Ok(())
}

pub fn family_state(f: f64) -> Result<DensityMatrix> {
    check_range(f)?;
    let mut m = CMat::outer(&phi_plus()).scale(f);
    m[(1, 1)] += Complex64::new(1.0 - f, 0.0);
    validate_density(&m)
}

/// ½(1 + F²/(4(1−F))) for F ≤ 2/3, and F above.
pub fn family_fstar(f: f64) -> Result<f64> {
    check_range(f)?;
    Ok(if f <= 2.0 / 3.0 {
        0.5 * (1.0 + f * f / (4.0 * (1.0 - f)))
    } else {
        f
    })
}

#[derive(Clone, Debug)]
pub struct FamilyFilter {
    pub filter: LocalOperator,
    /// True for F ≥ 2/3, where the identity is optimal.
    pub trivial: bool,
}

/// Alice's optimal filter diag(F/(2(1−F)), 1).
pub fn family_filter(f: f64) -> Result<FamilyFilter> {
    check_range(f)?;
    if f >= 2.0 / 3.0 {
        return Ok(FamilyFilter {
            filter: LocalOperator::identity(),
            trivial: true,
        });
    }
    Ok(FamilyFilter {
        filter: LocalOperator::new(CMat::diag_real(&[f / (2.0 * (1.0 - f)), 1.0]))?,
        trivial: false,
    })
}

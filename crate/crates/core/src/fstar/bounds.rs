//! Closed-form bounds on F* from the negativity and concurrence.

use crate::error::Result;
use crate::measures::{concurrence, ENTANGLEMENT_THRESHOLD};
use crate::qmat::{herm_eig, partial_transpose_b, DensityMatrix, PureState};

#[derive(Clone, Debug)]
pub struct BoundsReport {
    /// ½(1 + N/(1 + √(1 − (N/C)²)))
    pub lower: f64,
    /// ½(1 + N/(1 + √(1 − C(v₋)²))), never below `lower`.
    pub tight_lower: f64,
    /// ½(1 + N)
    pub upper: f64,
    /// Eigenvector of ρ^Γ with the smallest eigenvalue.
    pub v_minus: PureState,
    pub c_vminus: f64,
    pub negativity: f64,
    pub concurrence: f64,
    /// Set when ρ is PPT; all bounds are then 1/2.
    pub separable: bool,
}

/// Lower bound from X = v₋v₋†/(1 + √(1 − C(v₋)²)), whose value is
/// ½ + ½N/(1 + √(1 − C(v₋)²)), relaxed by C(v₋) ≥ N/C; upper bound from X ≤ I
/// restricted to the negative eigenspace.
pub fn fstar_bounds(rho: &DensityMatrix) -> Result<BoundsReport> {
    let e = herm_eig(&partial_transpose_b(rho.matrix())?)?;
    let v = e.vector(0);
    let v_minus = PureState::normalized([v[0], v[1], v[2], v[3]])?;
    let c_vminus = v_minus.concurrence();
    let lmin = e.values[0];
    let c = concurrence(rho)?;
    if lmin >= -ENTANGLEMENT_THRESHOLD {
        return Ok(BoundsReport {
            lower: 0.5,
            tight_lower: 0.5,
            upper: 0.5,
            v_minus,
            c_vminus,
            negativity: 0.0,
            concurrence: c,
            separable: true,
        });
    }
    let n = -2.0 * lmin;
    let ratio = if c > 0.0 { (n / c).min(1.0) } else { 1.0 };
    let bound = |cv: f64| 0.5 * (1.0 + n / (1.0 + (1.0 - cv * cv).max(0.0).sqrt()));
    Ok(BoundsReport {
        lower: bound(ratio),
        tight_lower: bound(c_vminus.min(1.0)),
        upper: 0.5 * (1.0 + n),
        v_minus,
        c_vminus,
        negativity: n,
        concurrence: c,
        separable: false,
    })
}

//! CGLMP inequality evaluation for d-output boxes.
//!
//! The functional is a weighted sum over output-difference residues. With
//! `δ = (b − a) mod d` and weights `1 − 2k/(d − 1)`,
//!
//! ```text
//! E_xy = Σ_{k=0}^{⌊d/2⌋−1} (1 − 2k/(d−1)) (P(δ = −k | xy) − P(δ = k+1 | xy))
//! I_d  = E_00 + E_01 + E_10 − E_11
//! ```
//!
//! Local boxes satisfy `I_d ≤ 2`; the algebraic maximum is 4, attained by
//! the nonlocal vertex for every d. At `d = 2` the functional coincides
//! with CHSH.

use crate::boxes::NsBox;

/// Largest value attainable by local (classical) boxes.
pub const LOCAL_BOUND: f64 = 2.0;

/// Largest value attainable by any normalized box.
pub const ALGEBRAIC_MAX: f64 = 4.0;

/// Probability that the outputs differ by residue `j`: `Σ_a P(a, a+j | xy)`.
fn residue_prob(b: &NsBox, x: usize, y: usize, j: usize) -> f64 {
    let d = b.d();
    (0..d).map(|a| b.prob(x, y, a, (a + j) % d)).sum()
}

/// The CGLMP correlator `E_xy` for one input context.
pub fn correlator(b: &NsBox, x: usize, y: usize) -> f64 {
    let d = b.d();
    let mut e = 0.0;
    for k in 0..d / 2 {
        let weight = 1.0 - (2 * k) as f64 / (d - 1) as f64;
        let plus = residue_prob(b, x, y, (d - k) % d);
        let minus = residue_prob(b, x, y, (k + 1) % d);
        e += weight * (plus - minus);
    }
    e
}

/// The CGLMP value `E_00 + E_01 + E_10 − E_11`.
pub fn cglmp_value(b: &NsBox) -> f64 {
    let report = cglmp_report(b);
    report.value
}

/// Evaluates all four correlators and the combined value.
pub fn cglmp_report(b: &NsBox) -> CglmpReport {
    let e00 = correlator(b, 0, 0);
    let e01 = correlator(b, 0, 1);
    let e10 = correlator(b, 1, 0);
    let e11 = correlator(b, 1, 1);
    CglmpReport {
        d: b.d(),
        correlators: [e00, e01, e10, e11],
        value: e00 + e01 + e10 - e11,
    }
}

impl NsBox {
    /// The CGLMP value of this box.
    pub fn cglmp(&self) -> f64 {
        cglmp_value(self)
    }
}

/// Correlators `[E_00, E_01, E_10, E_11]` and the CGLMP value they combine
/// into.
#[derive(Copy, Clone, Debug)]
pub struct CglmpReport {
    pub d: usize,
    /// Indexed by `2x + y`.
    pub correlators: [f64; 4],
    pub value: f64,
}

impl CglmpReport {
    /// Amount above the local bound (negative when unviolated).
    pub fn violation(&self) -> f64 {
        self.value - LOCAL_BOUND
    }
}

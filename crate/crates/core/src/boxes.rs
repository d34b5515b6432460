//! The box data model: conditional probability tables `P(a, b | x, y)`,
//! canonical families, mixtures, nonsignaling validation, and affine
//! decomposition over the canonical four-box basis.
//!
//! Entries are stored flat in `(x, y, a, b)` row-major order; that order is
//! also the serialized layout used by the file formats.

use alloc::vec;
use alloc::vec::Vec;

use crate::{fabs, fmax, Error, DEFAULT_INVARIANT_TOL};

/// Entries computed from valid inputs may dip this far below zero from
/// rounding; they are clamped to 0 on construction. Anything lower is a
/// genuine negative probability and is rejected.
const CLAMP_TOL: f64 = 1e-12;

/// Mixture weights must sum to 1 within this slack.
const WEIGHT_SUM_TOL: f64 = DEFAULT_INVARIANT_TOL;

/// A bipartite nonsignaling correlated box: binary inputs `x, y`, outputs
/// `a, b ∈ {0, …, d−1}`, and the joint table `P(a, b | x, y)`.
///
/// Boxes are immutable once built. Constructors guarantee normalization per
/// input context and nonnegativity; the canonical families and mixtures of
/// them are nonsignaling by construction. Arbitrary tables can be loaded
/// with [`NsBox::from_table`] and audited with
/// [`NsBox::validate_nonsignaling`], which reports violations instead of
/// rejecting them.
#[derive(Clone, Debug, PartialEq)]
pub struct NsBox {
    d: usize,
    p: Vec<f64>,
}

#[inline]
fn index(d: usize, x: usize, y: usize, a: usize, b: usize) -> usize {
    ((x * 2 + y) * d + a) * d + b
}

fn check_dim(d: usize) -> Result<(), Error> {
    if d < 2 {
        Err(Error::DimensionTooSmall { d })
    } else {
        Ok(())
    }
}

impl NsBox {
    /// The nonlocal vertex: `P(a, b | x, y) = 1/d` when
    /// `(b − a) mod d = x·y`, else 0. Violates the CGLMP inequality by the
    /// algebraic maximum 4; for `d = 2` this is the PR box.
    pub fn nonlocal(d: usize) -> Result<Self, Error> {
        check_dim(d)?;
        let w = 1.0 / d as f64;
        let mut p = vec![0.0; 4 * d * d];
        for x in 0..2 {
            for y in 0..2 {
                let target = x * y;
                for a in 0..d {
                    let b = (a + target) % d;
                    p[index(d, x, y, a, b)] = w;
                }
            }
        }
        Ok(NsBox { d, p })
    }

    /// The local correlated box: uniform over `a = b`, independent of the
    /// inputs. CGLMP value 2.
    pub fn local_correlated(d: usize) -> Result<Self, Error> {
        check_dim(d)?;
        let w = 1.0 / d as f64;
        let mut p = vec![0.0; 4 * d * d];
        for x in 0..2 {
            for y in 0..2 {
                for a in 0..d {
                    p[index(d, x, y, a, a)] = w;
                }
            }
        }
        Ok(NsBox { d, p })
    }

    /// The local deterministic box: both parties always output `d − 1`.
    /// CGLMP value 2.
    pub fn local_deterministic(d: usize) -> Result<Self, Error> {
        check_dim(d)?;
        let mut p = vec![0.0; 4 * d * d];
        for x in 0..2 {
            for y in 0..2 {
                p[index(d, x, y, d - 1, d - 1)] = 1.0;
            }
        }
        Ok(NsBox { d, p })
    }

    /// The fully mixed box: every entry `1/d²`. CGLMP value 0.
    pub fn fully_mixed(d: usize) -> Result<Self, Error> {
        check_dim(d)?;
        let w = 1.0 / (d * d) as f64;
        Ok(NsBox {
            d,
            p: vec![w; 4 * d * d],
        })
    }

    /// The canonical basis `[NL, Lc, Ld, 𝟙]` every box is decomposed over.
    pub fn canonical_basis(d: usize) -> Result<[Self; 4], Error> {
        Ok([
            Self::nonlocal(d)?,
            Self::local_correlated(d)?,
            Self::local_deterministic(d)?,
            Self::fully_mixed(d)?,
        ])
    }

    /// Wraps a raw table in `(x, y, a, b)` row-major order.
    ///
    /// Only the shape and entry finiteness are checked; use
    /// [`NsBox::validate_nonsignaling`] to audit the distribution itself.
    pub fn from_table(d: usize, p: Vec<f64>) -> Result<Self, Error> {
        check_dim(d)?;
        let expected = 4 * d * d;
        if p.len() != expected {
            return Err(Error::TableShape {
                expected,
                actual: p.len(),
            });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry);
        }
        Ok(NsBox { d, p })
    }

    /// Output dimension `d`.
    pub fn d(&self) -> usize {
        self.d
    }

    /// The flat table in `(x, y, a, b)` row-major order.
    pub fn table(&self) -> &[f64] {
        &self.p
    }

    /// `P(a, b | x, y)`. Panics if an index is out of range.
    pub fn prob(&self, x: usize, y: usize, a: usize, b: usize) -> f64 {
        assert!(x < 2 && y < 2, "inputs are bits");
        assert!(a < self.d && b < self.d, "outputs must lie below d");
        self.p[index(self.d, x, y, a, b)]
    }

    /// Entrywise convex combination of boxes of equal dimension.
    ///
    /// Weights must be nonnegative and sum to 1.
    pub fn mix(boxes: &[Self], weights: &[f64]) -> Result<Self, Error> {
        if let Some(w) = weights.iter().find(|w| **w < 0.0) {
            return Err(Error::NegativeWeight { weight: *w });
        }
        Self::mix_affine(boxes, weights)
    }

    /// Entrywise affine combination: weights still sum to 1 but may be
    /// negative, as long as the result is a proper distribution
    /// (quasi-mixtures). Rejects combinations with genuinely negative
    /// entries.
    pub fn mix_affine(boxes: &[Self], weights: &[f64]) -> Result<Self, Error> {
        if boxes.is_empty() {
            return Err(Error::EmptyMixture);
        }
        if boxes.len() != weights.len() {
            return Err(Error::WeightCountMismatch {
                boxes: boxes.len(),
                weights: weights.len(),
            });
        }
        let d = boxes[0].d;
        for b in boxes {
            if b.d != d {
                return Err(Error::DimensionMismatch {
                    left: d,
                    right: b.d,
                });
            }
        }
        let sum: f64 = weights.iter().sum();
        if fabs(sum - 1.0) > WEIGHT_SUM_TOL {
            return Err(Error::WeightSum { sum });
        }
        let mut p = vec![0.0; 4 * d * d];
        for (b, w) in boxes.iter().zip(weights) {
            for (out, v) in p.iter_mut().zip(&b.p) {
                *out += w * v;
            }
        }
        clamp_entries(&mut p)?;
        Ok(NsBox { d, p })
    }

    /// Largest absolute entrywise difference to another box.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, Error> {
        if self.d != other.d {
            return Err(Error::DimensionMismatch {
                left: self.d,
                right: other.d,
            });
        }
        let mut worst = 0.0;
        for (a, b) in self.p.iter().zip(&other.p) {
            worst = fmax(worst, fabs(a - b));
        }
        Ok(worst)
    }

    /// Audits normalization, nonnegativity and both marginal-consistency
    /// families; reports the violations instead of failing.
    pub fn validate_nonsignaling(&self, tol: f64) -> NonsignalingReport {
        let d = self.d;
        let mut normalization = 0.0;
        let mut negativity = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                let mut sum = 0.0;
                for a in 0..d {
                    for b in 0..d {
                        let v = self.p[index(d, x, y, a, b)];
                        sum += v;
                        if v < 0.0 {
                            negativity = fmax(negativity, -v);
                        }
                    }
                }
                normalization = fmax(normalization, fabs(sum - 1.0));
            }
        }

        // Alice's marginal must not depend on y (no signaling Bob -> Alice).
        let mut alice_marginal = 0.0;
        for x in 0..2 {
            for a in 0..d {
                let m0: f64 = (0..d).map(|b| self.p[index(d, x, 0, a, b)]).sum();
                let m1: f64 = (0..d).map(|b| self.p[index(d, x, 1, a, b)]).sum();
                alice_marginal = fmax(alice_marginal, fabs(m0 - m1));
            }
        }
        // Bob's marginal must not depend on x (no signaling Alice -> Bob).
        let mut bob_marginal = 0.0;
        for y in 0..2 {
            for b in 0..d {
                let m0: f64 = (0..d).map(|a| self.p[index(d, 0, y, a, b)]).sum();
                let m1: f64 = (0..d).map(|a| self.p[index(d, 1, y, a, b)]).sum();
                bob_marginal = fmax(bob_marginal, fabs(m0 - m1));
            }
        }

        NonsignalingReport {
            tol,
            normalization,
            negativity,
            alice_marginal,
            bob_marginal,
        }
    }

    /// Least-squares affine fit of this box over the canonical basis
    /// `[NL, Lc, Ld, 𝟙]` with the coefficient sum constrained to 1.
    ///
    /// Coefficients may be negative (quasi-mixtures occur in composed
    /// boxes). A residual below tolerance certifies membership of the
    /// affine span; a large residual is informative output, not an error.
    pub fn decompose_affine(&self) -> AffineDecomposition {
        let d = self.d;
        let nl = Self::nonlocal(d).expect("valid dimension");
        let lc = Self::local_correlated(d).expect("valid dimension");
        let ld = Self::local_deterministic(d).expect("valid dimension");
        let mixed = Self::fully_mixed(d).expect("valid dimension");

        // Substitute c_mix = 1 - c_nl - c_lc - c_ld and solve the 3x3
        // normal equations of || sum_i c_i (B_i - 1/d^2) - (P - 1/d^2) ||.
        let shifted: [Vec<f64>; 3] = [
            diff(&nl.p, &mixed.p),
            diff(&lc.p, &mixed.p),
            diff(&ld.p, &mixed.p),
        ];
        let target = diff(&self.p, &mixed.p);

        let mut gram = [[0.0_f64; 3]; 3];
        let mut rhs = [0.0_f64; 3];
        for i in 0..3 {
            for j in i..3 {
                let g = dot(&shifted[i], &shifted[j]);
                gram[i][j] = g;
                gram[j][i] = g;
            }
            rhs[i] = dot(&shifted[i], &target);
        }
        let [c_nl, c_lc, c_ld] = solve3(gram, rhs);
        let c_mix = 1.0 - c_nl - c_lc - c_ld;

        let mut residual = 0.0;
        for (i, t) in self.p.iter().enumerate() {
            let rebuilt = c_nl * nl.p[i] + c_lc * lc.p[i] + c_ld * ld.p[i] + c_mix * mixed.p[i];
            residual = fmax(residual, fabs(rebuilt - t));
        }

        AffineDecomposition {
            c_nl,
            c_lc,
            c_ld,
            c_mix,
            residual,
        }
    }

    pub(crate) fn from_computed(d: usize, mut p: Vec<f64>) -> Result<Self, Error> {
        clamp_entries(&mut p)?;
        Ok(NsBox { d, p })
    }
}

fn clamp_entries(p: &mut [f64]) -> Result<(), Error> {
    for v in p.iter_mut() {
        if *v < 0.0 {
            if *v < -CLAMP_TOL {
                return Err(Error::NegativeEntry { value: *v });
            }
            *v = 0.0;
        }
    }
    Ok(())
}

fn diff(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gaussian elimination with partial pivoting on a 3x3 system. The basis
/// boxes are affinely independent for every d >= 2, so the Gram matrix is
/// positive definite.
#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let mut pivot = col;
        for row in col + 1..3 {
            if fabs(m[row][col]) > fabs(m[pivot][col]) {
                pivot = row;
            }
        }
        m.swap(col, pivot);
        r.swap(col, pivot);
        let diag = m[col][col];
        for row in col + 1..3 {
            let f = m[row][col] / diag;
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut acc = r[col];
        for k in col + 1..3 {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    x
}

/// Which invariant family a validation violation belongs to.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Normalization,
    Negativity,
    /// Alice's marginal depends on Bob's input.
    AliceMarginal,
    /// Bob's marginal depends on Alice's input.
    BobMarginal,
}

/// Outcome of [`NsBox::validate_nonsignaling`]: the worst deviation in each
/// invariant family, against the tolerance it was audited at.
#[derive(Copy, Clone, Debug)]
pub struct NonsignalingReport {
    pub tol: f64,
    /// Worst `|Σ_{a,b} P − 1|` over the four input contexts.
    pub normalization: f64,
    /// Worst amount any entry lies below zero.
    pub negativity: f64,
    /// Worst dependence of Alice's marginal on `y`.
    pub alice_marginal: f64,
    /// Worst dependence of Bob's marginal on `x`.
    pub bob_marginal: f64,
}

impl NonsignalingReport {
    /// Largest violation across all families.
    pub fn worst(&self) -> f64 {
        fmax(
            fmax(self.normalization, self.negativity),
            fmax(self.alice_marginal, self.bob_marginal),
        )
    }

    /// The family holding the largest violation.
    pub fn worst_kind(&self) -> ViolationKind {
        let w = self.worst();
        if w == self.normalization {
            ViolationKind::Normalization
        } else if w == self.negativity {
            ViolationKind::Negativity
        } else if w == self.alice_marginal {
            ViolationKind::AliceMarginal
        } else {
            ViolationKind::BobMarginal
        }
    }

    pub fn pass(&self) -> bool {
        self.worst() <= self.tol
    }
}

/// Coefficients of a box over the canonical basis `[NL, Lc, Ld, 𝟙]`,
/// summing to 1, with the max-norm reconstruction error.
#[derive(Copy, Clone, Debug)]
pub struct AffineDecomposition {
    pub c_nl: f64,
    pub c_lc: f64,
    pub c_ld: f64,
    pub c_mix: f64,
    /// Max-norm gap between the reconstruction and the decomposed box.
    pub residual: f64,
}

impl AffineDecomposition {
    /// Coefficients in basis order `[NL, Lc, Ld, 𝟙]`.
    pub fn coefficients(&self) -> [f64; 4] {
        [self.c_nl, self.c_lc, self.c_ld, self.c_mix]
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.c_nl + self.c_lc + self.c_ld + self.c_mix
    }

    /// True when the residual certifies exact membership of the span.
    pub fn is_exact(&self, tol: f64) -> bool {
        self.residual <= tol
    }

    /// Largest absolute coefficient difference to another decomposition.
    pub fn max_coefficient_diff(&self, other: &[f64; 4]) -> f64 {
        self.coefficients()
            .iter()
            .zip(other)
            .fold(0.0, |acc, (a, b)| fmax(acc, fabs(a - b)))
    }
}

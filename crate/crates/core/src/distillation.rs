//! Distillation protocols built on the comparator wiring.
//!
//! Both protocols wire two copies of a box `ε·NL + (1−ε)·L` and differ only
//! in the output offset and the local box they tolerate:
//!
//! * offset 0 distills mixtures with the local correlated box, one round
//!   mapping `ε ↦ (1 + 1/d)ε − ε²/d`;
//! * offset 1 distills mixtures with the local deterministic box, one round
//!   mapping `ε ↦ 2ε − ε²` independently of d.
//!
//! Every closed form here is double-checked elsewhere against the exact
//! wiring composition; the functions in this module expose both the oracle
//! path (compose actual tables) and the predicted path (evaluate the maps)
//! so callers can compare them.

use alloc::vec::Vec;

use crate::boxes::{AffineDecomposition, NsBox};
use crate::wiring::{wire, WiringSpec};
use crate::{fabs, Dim, Error};

/// Residual below which a decomposition is trusted to identify a mixture
/// family, letting oracle results attach closed-form predictions.
const RECOGNITION_TOL: f64 = 1e-10;

/// The two comparator-wiring distillation protocols.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Offset-0 wiring; acts on nonlocal/local-correlated mixtures.
    A,
    /// Offset-1 wiring; acts on nonlocal/local-deterministic mixtures.
    B,
}

impl Protocol {
    /// Output offset of the comparator wiring this protocol uses.
    pub fn offset(&self) -> usize {
        match self {
            Protocol::A => 0,
            Protocol::B => 1,
        }
    }

    /// The local box family whose mixtures this protocol distills.
    pub fn family(&self) -> LocalFamily {
        match self {
            Protocol::A => LocalFamily::Correlated,
            Protocol::B => LocalFamily::Deterministic,
        }
    }

    /// The comparator wiring at dimension `d`.
    pub fn wiring(&self, d: usize) -> Result<WiringSpec, Error> {
        WiringSpec::comparator(d, self.offset())
    }

    /// One round of the closed-form weight map.
    pub fn predict(&self, epsilon: f64, d: Dim) -> Result<f64, Error> {
        match self {
            Protocol::A => predict_epsilon_a(epsilon, d),
            Protocol::B => {
                d.validate()?;
                predict_epsilon_b(epsilon)
            }
        }
    }
}

impl core::fmt::Display for Protocol {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Protocol::A => f.write_str("A"),
            Protocol::B => f.write_str("B"),
        }
    }
}

/// The local box paired with the nonlocal vertex in distillable mixtures.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum LocalFamily {
    /// Uniform over equal outputs.
    Correlated,
    /// Point mass on the top symbol pair.
    Deterministic,
}

impl LocalFamily {
    /// Builds the family's box at dimension `d`.
    pub fn build(&self, d: usize) -> Result<NsBox, Error> {
        match self {
            LocalFamily::Correlated => NsBox::local_correlated(d),
            LocalFamily::Deterministic => NsBox::local_deterministic(d),
        }
    }

    /// The protocol that distills mixtures over this family.
    pub fn protocol(&self) -> Protocol {
        match self {
            LocalFamily::Correlated => Protocol::A,
            LocalFamily::Deterministic => Protocol::B,
        }
    }
}

impl core::fmt::Display for LocalFamily {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LocalFamily::Correlated => f.write_str("correlated"),
            LocalFamily::Deterministic => f.write_str("deterministic"),
        }
    }
}

/// A two-box mixture `ε·NL + (1−ε)·L` at finite dimension.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct MixtureParams {
    pub epsilon: f64,
    pub d: usize,
    pub family: LocalFamily,
}

impl MixtureParams {
    pub fn new(epsilon: f64, d: usize, family: LocalFamily) -> Result<Self, Error> {
        check_epsilon(epsilon)?;
        Dim::Finite(d).validate()?;
        Ok(MixtureParams { epsilon, d, family })
    }

    /// CGLMP value of the mixture: `2 + 2ε`.
    pub fn cglmp(&self) -> f64 {
        2.0 + 2.0 * self.epsilon
    }
}

/// Builds the mixture `ε·NL + (1−ε)·L` as an explicit table.
pub fn build_mixture(params: &MixtureParams) -> Result<NsBox, Error> {
    let nl = NsBox::nonlocal(params.d)?;
    let local = params.family.build(params.d)?;
    NsBox::mix(&[nl, local], &[params.epsilon, 1.0 - params.epsilon])
}

fn check_epsilon(epsilon: f64) -> Result<(), Error> {
    if !(0.0..=1.0).contains(&epsilon) || !epsilon.is_finite() {
        return Err(Error::EpsilonRange { value: epsilon });
    }
    Ok(())
}

/// One round of offset-0 distillation on a nonlocal/local-correlated
/// mixture: `ε ↦ (1 + 1/d)ε − ε²/d`. At `d = 2` this is `ε(3 − ε)/2`; the
/// gain vanishes as `d → ∞`.
pub fn predict_epsilon_a(epsilon: f64, d: Dim) -> Result<f64, Error> {
    check_epsilon(epsilon)?;
    d.validate()?;
    let inv = d.inv();
    Ok((1.0 + inv) * epsilon - epsilon * epsilon * inv)
}

/// One round of offset-1 distillation on a nonlocal/local-deterministic
/// mixture: `ε ↦ 2ε − ε²`, equivalently `1 − ε′ = (1 − ε)²`, for every d.
pub fn predict_epsilon_b(epsilon: f64) -> Result<f64, Error> {
    check_epsilon(epsilon)?;
    Ok(2.0 * epsilon - epsilon * epsilon)
}

/// Outcome of wiring a box with itself under a protocol.
///
/// The oracle fields are always present. The closed-form fields are
/// attached only when the input is recognized as a mixture of the
/// protocol's two-box family, in which case `oracle_residual` is the
/// max-norm gap between the composed table and the predicted mixture.
#[derive(Clone, Debug)]
pub struct DistillationResult {
    pub protocol: Protocol,
    pub d: usize,
    pub cglmp_initial: f64,
    pub cglmp_final: f64,
    pub output: NsBox,
    pub epsilon_initial: Option<f64>,
    pub epsilon_predicted: Option<f64>,
    pub oracle_residual: Option<f64>,
}

/// Recovers `ε` when the decomposition certifies membership of the
/// protocol's two-box mixture family.
fn recognize_epsilon(dec: &AffineDecomposition, protocol: Protocol) -> Option<f64> {
    if dec.residual > RECOGNITION_TOL {
        return None;
    }
    let (eps, off) = match protocol {
        Protocol::A => (dec.c_nl, [dec.c_ld, dec.c_mix]),
        Protocol::B => (dec.c_nl, [dec.c_lc, dec.c_mix]),
    };
    if off.iter().any(|c| fabs(*c) > RECOGNITION_TOL) {
        return None;
    }
    if !(-RECOGNITION_TOL..=1.0 + RECOGNITION_TOL).contains(&eps) {
        return None;
    }
    Some(eps.clamp(0.0, 1.0))
}

/// Wires a box with itself under the protocol's comparator wiring and
/// evaluates CGLMP before and after.
pub fn distill_once(input: &NsBox, protocol: Protocol) -> Result<DistillationResult, Error> {
    let d = input.d();
    let spec = protocol.wiring(d)?;
    let output = wire(input, input, &spec)?;
    let cglmp_initial = input.cglmp();
    let cglmp_final = output.cglmp();

    let mut epsilon_initial = None;
    let mut epsilon_predicted = None;
    let mut oracle_residual = None;
    if let Some(eps) = recognize_epsilon(&input.decompose_affine(), protocol) {
        let predicted = protocol.predict(eps, Dim::Finite(d))?.clamp(0.0, 1.0);
        let mixture = build_mixture(&MixtureParams {
            epsilon: predicted,
            d,
            family: protocol.family(),
        })?;
        epsilon_initial = Some(eps);
        epsilon_predicted = Some(predicted);
        oracle_residual = Some(output.max_abs_diff(&mixture)?);
    }

    Ok(DistillationResult {
        protocol,
        d,
        cglmp_initial,
        cglmp_final,
        output,
        epsilon_initial,
        epsilon_predicted,
        oracle_residual,
    })
}

/// One round of a distillation trajectory.
#[derive(Copy, Clone, Debug)]
pub struct TrajectoryPoint {
    /// 0 is the starting mixture.
    pub round: usize,
    /// Source boxes consumed by this round: `2^round`, saturating.
    pub copies: u128,
    /// Closed-form nonlocal weight after `round` rounds.
    pub epsilon: f64,
    /// CGLMP value of the composed table after `round` rounds.
    pub cglmp: f64,
    /// Max-norm gap between the composed table and the closed-form mixture.
    pub oracle_gap: f64,
}

/// Repeatedly wires the box with itself, tracking the oracle table and the
/// closed-form weight side by side. The mixture family must match the
/// protocol, otherwise the closed form would not apply.
pub fn distill_iterate(
    params: &MixtureParams,
    protocol: Protocol,
    rounds: usize,
) -> Result<Vec<TrajectoryPoint>, Error> {
    if params.family != protocol.family() {
        return Err(Error::ProtocolFamilyMismatch);
    }
    let d = params.d;
    let spec = protocol.wiring(d)?;
    let mut current = build_mixture(params)?;
    let mut epsilon = params.epsilon;

    let mut trajectory = Vec::with_capacity(rounds + 1);
    trajectory.push(TrajectoryPoint {
        round: 0,
        copies: 1,
        epsilon,
        cglmp: current.cglmp(),
        oracle_gap: 0.0,
    });
    for round in 1..=rounds {
        current = wire(&current, &current, &spec)?;
        epsilon = protocol.predict(epsilon, Dim::Finite(d))?.clamp(0.0, 1.0);
        let reference = build_mixture(&MixtureParams {
            epsilon,
            d,
            family: protocol.family(),
        })?;
        trajectory.push(TrajectoryPoint {
            round,
            copies: 1u128.checked_shl(round as u32).unwrap_or(u128::MAX),
            epsilon,
            cglmp: current.cglmp(),
            oracle_gap: current.max_abs_diff(&reference)?,
        });
    }
    Ok(trajectory)
}

/// A three-box mixture `ξ·NL + γ·L + (1 − ξ − γ)·𝟙`: a distillable pair
/// diluted by uniform noise.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NoisyParams {
    pub xi: f64,
    pub gamma: f64,
    pub d: Dim,
    pub family: LocalFamily,
}

impl NoisyParams {
    pub fn new(xi: f64, gamma: f64, d: Dim, family: LocalFamily) -> Result<Self, Error> {
        d.validate()?;
        if !xi.is_finite() || !gamma.is_finite() || xi < 0.0 || gamma < 0.0 {
            return Err(Error::NoisyWeights { xi, gamma });
        }
        if xi + gamma > 1.0 + crate::DEFAULT_INVARIANT_TOL {
            return Err(Error::NoisyWeights { xi, gamma });
        }
        Ok(NoisyParams {
            xi,
            gamma,
            d,
            family,
        })
    }

    /// Uniform-noise weight `1 − ξ − γ` (clamped against rounding).
    pub fn mu(&self) -> f64 {
        crate::fmax(0.0, 1.0 - self.xi - self.gamma)
    }

    /// CGLMP value of the starting mixture: `4ξ + 2γ`.
    pub fn initial_cglmp(&self) -> f64 {
        4.0 * self.xi + 2.0 * self.gamma
    }

    /// Builds the starting mixture as an explicit table (finite d only).
    pub fn initial_box(&self) -> Result<NsBox, Error> {
        let d = self.d.finite().ok_or(Error::InfiniteDimension)?;
        let nl = NsBox::nonlocal(d)?;
        let local = self.family.build(d)?;
        let mixed = NsBox::fully_mixed(d)?;
        NsBox::mix(&[nl, local, mixed], &[self.xi, self.gamma, self.mu()])
    }
}

/// Closed-form basis coefficients `[NL, Lc, Ld, 𝟙]` after one round of the
/// family's protocol on a noisy mixture. The Lc coefficient of the
/// deterministic family (and parts of the correlated family's) can be
/// negative: the composed box is a quasi-mixture yet still a proper
/// nonsignaling distribution.
pub fn noisy_final_coefficients(params: &NoisyParams) -> Result<[f64; 4], Error> {
    let xi = params.xi;
    let gamma = params.gamma;
    let mu = params.mu();
    let inv = params.d.inv();
    let inv_sq = params.d.inv_sq();
    let coeffs = match params.family {
        LocalFamily::Deterministic => {
            let c_nl = xi * xi + 2.0 * xi * gamma + xi * mu * inv_sq;
            let c_lc = -xi * mu * inv_sq;
            let c_ld = gamma * gamma;
            let c_mix = mu * (1.0 + xi + gamma);
            [c_nl, c_lc, c_ld, c_mix]
        }
        LocalFamily::Correlated => {
            let c_nl = xi * xi + (1.0 + inv) * xi * gamma + xi * mu * inv_sq;
            let c_lc = (1.0 - inv) * xi * gamma + gamma * gamma - xi * mu * inv_sq;
            let c_ld = 0.0;
            let c_mix = mu * (1.0 + xi + gamma);
            [c_nl, c_lc, c_ld, c_mix]
        }
    };
    Ok(coeffs)
}

/// Closed-form CGLMP value after one noisy round. For the deterministic
/// family this is
///
/// ```text
/// (4 − 2/d²)ξ² + (8 − 2/d²)ξγ + (2/d²)ξ + 2γ²
/// ```
///
/// and for the correlated family
///
/// ```text
/// (4 − 2/d²)ξ² + (6 + 2/d − 2/d²)ξγ + (2/d²)ξ + 2γ².
/// ```
///
/// Both stay at or below the algebraic maximum 4 on the whole parameter
/// simplex and are evaluated directly, so `d` may be infinite.
pub fn noisy_final_cglmp(params: &NoisyParams) -> Result<f64, Error> {
    let [c_nl, c_lc, c_ld, _] = noisy_final_coefficients(params)?;
    Ok(4.0 * c_nl + 2.0 * c_lc + 2.0 * c_ld)
}

/// One oracle round of the noisy protocol with closed-form cross-checks.
#[derive(Clone, Debug)]
pub struct NoisyResult {
    pub params: NoisyParams,
    pub protocol: Protocol,
    pub cglmp_initial: f64,
    pub cglmp_final: f64,
    pub output: NsBox,
    /// Least-squares coefficients of the composed table.
    pub decomposition: AffineDecomposition,
    /// Closed-form coefficients `[NL, Lc, Ld, 𝟙]`.
    pub predicted_coefficients: [f64; 4],
    pub predicted_cglmp: f64,
    /// Max-norm gap between the composed table and the predicted mixture.
    pub oracle_gap: f64,
}

/// Wires the noisy mixture with itself under the family's protocol and
/// compares the result with the closed forms. Requires finite d because the
/// oracle composes explicit tables; the closed forms alone also accept
/// infinite d.
pub fn distill_noisy(params: &NoisyParams) -> Result<NoisyResult, Error> {
    let d = params.d.finite().ok_or(Error::InfiniteDimension)?;
    let protocol = params.family.protocol();
    let input = params.initial_box()?;
    let spec = protocol.wiring(d)?;
    let output = wire(&input, &input, &spec)?;

    let predicted_coefficients = noisy_final_coefficients(params)?;
    let predicted_cglmp = noisy_final_cglmp(params)?;
    let basis = NsBox::canonical_basis(d)?;
    let reference = NsBox::mix_affine(&basis, &predicted_coefficients)?;

    Ok(NoisyResult {
        params: *params,
        protocol,
        cglmp_initial: input.cglmp(),
        cglmp_final: output.cglmp(),
        decomposition: output.decompose_affine(),
        oracle_gap: output.max_abs_diff(&reference)?,
        output,
        predicted_coefficients,
        predicted_cglmp,
    })
}

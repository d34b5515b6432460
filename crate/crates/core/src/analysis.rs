//! Survey helpers over the closed-form maps: efficiency curves across
//! dimensions, fixed points of the one-round maps, and the noise region
//! where a single round gains CGLMP value.

use alloc::vec::Vec;

use crate::distillation::{noisy_final_cglmp, LocalFamily, NoisyParams, Protocol};
use crate::{fabs, Dim, Error};

/// One grid cell of an efficiency sweep: a starting weight and the CGLMP
/// values before and after one round, both from the closed forms so that
/// infinite d is allowed.
#[derive(Copy, Clone, Debug)]
pub struct EfficiencyRow {
    pub protocol: Protocol,
    pub d: Dim,
    pub epsilon: f64,
    pub cglmp_initial: f64,
    pub cglmp_final: f64,
}

impl EfficiencyRow {
    /// CGLMP gained by the round (can be 0 at fixed points).
    pub fn gain(&self) -> f64 {
        self.cglmp_final - self.cglmp_initial
    }
}

/// Sweep output, ordered protocol-major, then dimension, then weight.
#[derive(Clone, Debug)]
pub struct EfficiencyGrid {
    pub rows: Vec<EfficiencyRow>,
}

/// Evaluates one closed-form round for every combination of protocol,
/// dimension and starting weight. CGLMP values use `2 + 2ε` on the
/// mixture, so a row costs O(1) regardless of dimension. Rows come out
/// protocol-major and sorted by dimension then weight within a protocol,
/// whatever order the inputs arrive in.
pub fn efficiency_curve(
    protocols: &[Protocol],
    dims: &[Dim],
    epsilons: &[f64],
) -> Result<EfficiencyGrid, Error> {
    for d in dims {
        d.validate()?;
    }
    if let Some(&eps) = epsilons.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(Error::EpsilonRange { value: eps });
    }
    let mut dims = dims.to_vec();
    dims.sort();
    let mut epsilons = epsilons.to_vec();
    epsilons.sort_by(|a, b| a.partial_cmp(b).expect("weights are finite"));
    let mut rows = Vec::with_capacity(protocols.len() * dims.len() * epsilons.len());
    for &protocol in protocols {
        for &d in &dims {
            for &epsilon in &epsilons {
                let next = protocol.predict(epsilon, d)?;
                rows.push(EfficiencyRow {
                    protocol,
                    d,
                    epsilon,
                    cglmp_initial: 2.0 + 2.0 * epsilon,
                    cglmp_final: 2.0 + 2.0 * next,
                });
            }
        }
    }
    Ok(EfficiencyGrid { rows })
}

/// Fixed points of a protocol's one-round weight map on `[0, 1]`.
#[derive(Clone, Debug)]
pub struct FixedPointSet {
    pub protocol: Protocol,
    pub d: Dim,
    /// True when the map is the identity, making every weight fixed.
    pub identity_map: bool,
    /// Isolated fixed points in increasing order; empty for identity maps.
    pub points: Vec<f64>,
}

/// Locates fixed points numerically: a sign scan of `predict(ε) − ε` over a
/// dense grid with bisection on each bracket. The maps are smooth
/// low-degree polynomials, so the scan is exhaustive at this resolution.
pub fn fixed_points(protocol: Protocol, d: Dim) -> Result<FixedPointSet, Error> {
    d.validate()?;
    const CELLS: usize = 4096;
    const ROOT_TOL: f64 = 1e-12;

    let h = |eps: f64| -> f64 {
        let p = protocol.predict(eps, d).expect("epsilon stays in range");
        p - eps
    };

    let mut values = Vec::with_capacity(CELLS + 1);
    let mut max_dev = 0.0;
    for i in 0..=CELLS {
        let eps = i as f64 / CELLS as f64;
        let v = h(eps);
        max_dev = crate::fmax(max_dev, fabs(v));
        values.push((eps, v));
    }
    if max_dev <= ROOT_TOL {
        return Ok(FixedPointSet {
            protocol,
            d,
            identity_map: true,
            points: Vec::new(),
        });
    }

    let mut points = Vec::new();
    let mut push = |eps: f64| {
        if !points.iter().any(|p: &f64| fabs(p - eps) < 1e-6) {
            points.push(eps);
        }
    };
    for window in values.windows(2) {
        let (x0, v0) = window[0];
        let (x1, v1) = window[1];
        if fabs(v0) <= ROOT_TOL {
            push(x0);
        } else if v0 * v1 < 0.0 {
            let (mut lo, mut hi) = (x0, x1);
            let mut flo = v0;
            let mut root = 0.5 * (lo + hi);
            for _ in 0..200 {
                root = 0.5 * (lo + hi);
                let froot = h(root);
                if fabs(froot) <= ROOT_TOL {
                    break;
                }
                if flo * froot < 0.0 {
                    hi = root;
                } else {
                    lo = root;
                    flo = froot;
                }
            }
            push(root);
        }
    }
    let (last, vlast) = *values.last().expect("grid nonempty");
    if fabs(vlast) <= ROOT_TOL {
        push(last);
    }
    points.sort_by(|a, b| a.partial_cmp(b).expect("no NaN roots"));
    Ok(FixedPointSet {
        protocol,
        d,
        identity_map: false,
        points,
    })
}

/// One cell of the noise-region scan for the deterministic-family
/// protocol: does a single round strictly increase the CGLMP value of
/// `ξ·NL + γ·Ld + (1 − ξ − γ)·𝟙`?
#[derive(Copy, Clone, Debug)]
pub struct RegionPoint {
    pub xi: f64,
    pub gamma: f64,
    pub d: Dim,
    pub cglmp_initial: f64,
    pub cglmp_final: f64,
    /// Strict improvement; points on the break-even boundary are false.
    pub works: bool,
}

impl RegionPoint {
    /// Signed improvement `final − initial`; 0 on the boundary.
    pub fn margin(&self) -> f64 {
        self.cglmp_final - self.cglmp_initial
    }
}

/// Classifies one `(ξ, γ)` cell via the closed forms (infinite d allowed).
pub fn works_region(xi: f64, gamma: f64, d: Dim) -> Result<RegionPoint, Error> {
    let params = NoisyParams::new(xi, gamma, d, LocalFamily::Deterministic)?;
    let cglmp_initial = params.initial_cglmp();
    let cglmp_final = noisy_final_cglmp(&params)?;
    Ok(RegionPoint {
        xi,
        gamma,
        d,
        cglmp_initial,
        cglmp_final,
        works: cglmp_final > cglmp_initial,
    })
}

/// Evenly spaced points of the weight simplex `ξ, γ ≥ 0`, `ξ + γ ≤ 1`:
/// an n-per-axis lattice over the unit square with the far triangle cut
/// off. Lattice cells on the diagonal are kept.
pub fn simplex_grid(n: usize) -> Result<Vec<(f64, f64)>, Error> {
    if n < 2 {
        return Err(Error::GridValue { value: n as f64 });
    }
    let step = 1.0 / (n - 1) as f64;
    let mut cells = Vec::new();
    for i in 0..n {
        let xi = i as f64 * step;
        for j in 0..n {
            let gamma = j as f64 * step;
            if xi + gamma <= 1.0 + 1e-12 {
                cells.push((xi, gamma));
            }
        }
    }
    Ok(cells)
}

//! Closed-form composition rules for canonical boxes under the comparator
//! wirings, each checked against the exact table composition.
//!
//! `K` marks the quasi-mixture `(1/d²)·NL − (1/d²)·Lc + 𝟙`, which is a
//! proper nonsignaling box despite the negative coefficient.

use nldist_core::{wire, NsBox, WiringSpec};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum B {
    Nl,
    Lc,
    Ld,
    Mixed,
}

impl B {
    fn build(self, d: usize) -> NsBox {
        match self {
            B::Nl => NsBox::nonlocal(d),
            B::Lc => NsBox::local_correlated(d),
            B::Ld => NsBox::local_deterministic(d),
            B::Mixed => NsBox::fully_mixed(d),
        }
        .unwrap()
    }
}

#[derive(Copy, Clone, Debug)]
enum Expect {
    Pure(B),
    /// `(1/d)·NL + (1 − 1/d)·Lc`.
    LcNlSplit,
    /// `(1/d²)·NL − (1/d²)·Lc + 𝟙`.
    Quasi,
}

impl Expect {
    fn coefficients(self, d: usize) -> [f64; 4] {
        let inv = 1.0 / d as f64;
        match self {
            Expect::Pure(B::Nl) => [1.0, 0.0, 0.0, 0.0],
            Expect::Pure(B::Lc) => [0.0, 1.0, 0.0, 0.0],
            Expect::Pure(B::Ld) => [0.0, 0.0, 1.0, 0.0],
            Expect::Pure(B::Mixed) => [0.0, 0.0, 0.0, 1.0],
            Expect::LcNlSplit => [inv, 1.0 - inv, 0.0, 0.0],
            Expect::Quasi => [inv * inv, -inv * inv, 0.0, 1.0],
        }
    }
}

const OFFSET0_RULES: &[(B, B, Expect)] = &[
    (B::Nl, B::Nl, Expect::Pure(B::Nl)),
    (B::Nl, B::Lc, Expect::Pure(B::Nl)),
    (B::Lc, B::Nl, Expect::LcNlSplit),
    (B::Lc, B::Lc, Expect::Pure(B::Lc)),
    (B::Nl, B::Mixed, Expect::Pure(B::Mixed)),
    (B::Mixed, B::Nl, Expect::Quasi),
    (B::Lc, B::Mixed, Expect::Pure(B::Mixed)),
    (B::Mixed, B::Lc, Expect::Pure(B::Mixed)),
    (B::Mixed, B::Mixed, Expect::Pure(B::Mixed)),
];

const OFFSET1_RULES: &[(B, B, Expect)] = &[
    (B::Nl, B::Nl, Expect::Pure(B::Nl)),
    (B::Nl, B::Ld, Expect::Pure(B::Nl)),
    (B::Ld, B::Nl, Expect::Pure(B::Nl)),
    (B::Ld, B::Ld, Expect::Pure(B::Ld)),
    (B::Nl, B::Mixed, Expect::Pure(B::Mixed)),
    (B::Mixed, B::Nl, Expect::Quasi),
    (B::Ld, B::Mixed, Expect::Pure(B::Mixed)),
    (B::Mixed, B::Ld, Expect::Pure(B::Mixed)),
    (B::Mixed, B::Mixed, Expect::Pure(B::Mixed)),
];

fn check_rules(offset: usize, rules: &[(B, B, Expect)]) {
    for d in 2..=6 {
        let spec = WiringSpec::comparator(d, offset).unwrap();
        let basis = NsBox::canonical_basis(d).unwrap();
        for &(first, second, expect) in rules {
            let got = wire(&first.build(d), &second.build(d), &spec).unwrap();
            let coeffs = expect.coefficients(d);
            let want = NsBox::mix_affine(&basis, &coeffs).unwrap();
            let gap = got.max_abs_diff(&want).unwrap();
            assert!(
                gap <= 1e-12,
                "offset {offset}, d={d}: {first:?} ∘ {second:?} missed {expect:?} by {gap:e}"
            );
            let dec = got.decompose_affine();
            assert!(
                dec.max_coefficient_diff(&coeffs) <= 1e-10,
                "offset {offset}, d={d}: {first:?} ∘ {second:?} decomposed to {dec:?}"
            );
        }
    }
}

#[test]
fn offset0_rule_table() {
    check_rules(0, OFFSET0_RULES);
}

#[test]
fn offset1_rule_table() {
    check_rules(1, OFFSET1_RULES);
}

#[test]
fn deterministic_pair_leaves_the_span_at_offset0() {
    // Without the offset the two point masses land on symbol d − 2, which
    // sits outside the four-box span for d >= 3. This is the reason the
    // deterministic family needs the offset-1 wiring.
    let d = 3;
    let spec = WiringSpec::comparator(d, 0).unwrap();
    let ld = NsBox::local_deterministic(d).unwrap();
    let got = wire(&ld, &ld, &spec).unwrap();
    assert_eq!(got.prob(0, 0, d - 2, d - 2), 1.0);
    let dec = got.decompose_affine();
    assert!(dec.residual > 1e-3, "unexpectedly close: {dec:?}");
}

#[test]
fn rules_compose_bilinearly_into_mixtures() {
    // A spot check that the rule table extends linearly: wiring two
    // two-box mixtures matches the rule-expanded quadratic form entry for
    // entry.
    let d = 4;
    let spec = WiringSpec::comparator(d, 1).unwrap();
    let nl = NsBox::nonlocal(d).unwrap();
    let ld = NsBox::local_deterministic(d).unwrap();
    let eps = 0.35;
    let m = NsBox::mix(&[nl.clone(), ld.clone()], &[eps, 1.0 - eps]).unwrap();
    let got = wire(&m, &m, &spec).unwrap();

    // eps^2 NL·NL + eps(1-eps) (NL·Ld + Ld·NL) + (1-eps)^2 Ld·Ld
    let c_nl = eps * eps + 2.0 * eps * (1.0 - eps);
    let c_ld = (1.0 - eps) * (1.0 - eps);
    let want = NsBox::mix(&[nl, ld], &[c_nl, c_ld]).unwrap();
    assert!(got.max_abs_diff(&want).unwrap() <= 1e-12);
}

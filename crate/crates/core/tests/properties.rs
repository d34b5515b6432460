//! Randomized invariants: nonsignaling closure under wirings, CGLMP bounds
//! and linearity, and decomposition round trips.
//!
//! Random boxes come from two independent constructions so the properties
//! are exercised away from the canonical four-box span: products of
//! per-party marginals plus a double-centered correction tensor (exactly
//! nonsignaling by construction), and convex mixtures of local
//! deterministic vertices.

use nldist_core::{
    build_mixture, distill_once, wire, Dim, LocalFamily, MixtureParams, NsBox, Protocol, WiringSpec,
};
use proptest::prelude::*;

fn normalize_chunks(v: &mut [f64], chunk: usize) {
    for block in v.chunks_mut(chunk) {
        let sum: f64 = block.iter().sum();
        for w in block {
            *w /= sum;
        }
    }
}

/// Product of marginals plus a double-centered correction, scaled to keep
/// every entry nonnegative. Both marginal families are independent of the
/// far input by construction.
fn correction_box(d: usize, ma: Vec<f64>, mb: Vec<f64>, raw: Vec<f64>, scale: f64) -> NsBox {
    let mut ma = ma;
    let mut mb = mb;
    normalize_chunks(&mut ma, d);
    normalize_chunks(&mut mb, d);

    let mut base = vec![0.0; 4 * d * d];
    let mut corr = vec![0.0; 4 * d * d];
    for x in 0..2 {
        for y in 0..2 {
            let slice = (x * 2 + y) * d * d;
            // Double-center the raw block so both of its marginals vanish.
            let mut row = vec![0.0; d];
            let mut col = vec![0.0; d];
            let mut total = 0.0;
            for a in 0..d {
                for b in 0..d {
                    let r = raw[slice + a * d + b];
                    row[a] += r;
                    col[b] += r;
                    total += r;
                }
            }
            for a in 0..d {
                for b in 0..d {
                    let i = slice + a * d + b;
                    base[i] = ma[x * d + a] * mb[y * d + b];
                    corr[i] =
                        raw[i] - row[a] / d as f64 - col[b] / d as f64 + total / (d * d) as f64;
                }
            }
        }
    }

    // Largest step that keeps entries nonnegative, capped so that the
    // centering residue stays far below validation tolerances.
    let mut t_max = 2.0_f64;
    for (b, c) in base.iter().zip(&corr) {
        if *c < 0.0 {
            t_max = t_max.min(b / -c);
        }
    }
    let t = scale * t_max;
    let p: Vec<f64> = base.iter().zip(&corr).map(|(b, c)| b + t * c).collect();
    NsBox::from_table(d, p).expect("shape is correct")
}

fn marginal_correction_strategy(d: usize) -> impl Strategy<Value = NsBox> {
    (
        prop::collection::vec(0.05..1.0f64, 2 * d),
        prop::collection::vec(0.05..1.0f64, 2 * d),
        prop::collection::vec(-1.0..1.0f64, 4 * d * d),
        0.0..0.9f64,
    )
        .prop_map(move |(ma, mb, raw, scale)| correction_box(d, ma, mb, raw, scale))
}

/// Convex mixture of local deterministic vertices `(α₀, α₁, β₀, β₁)`.
fn local_mixture_strategy(d: usize) -> impl Strategy<Value = NsBox> {
    let vertex = (0..d, 0..d, 0..d, 0..d);
    (
        prop::collection::vec(vertex, 1..6),
        prop::collection::vec(0.05..1.0f64, 6),
    )
        .prop_map(move |(vertices, mut weights)| {
            weights.truncate(vertices.len());
            let sum: f64 = weights.iter().sum();
            let mut p = vec![0.0; 4 * d * d];
            for ((a0, a1, b0, b1), w) in vertices.iter().zip(&weights) {
                for x in 0..2 {
                    let a = if x == 0 { *a0 } else { *a1 };
                    for y in 0..2 {
                        let b = if y == 0 { *b0 } else { *b1 };
                        p[((x * 2 + y) * d + a) * d + b] += w / sum;
                    }
                }
            }
            NsBox::from_table(d, p).expect("shape is correct")
        })
}

fn ns_box_strategy(d: usize) -> impl Strategy<Value = NsBox> {
    prop_oneof![
        3 => marginal_correction_strategy(d),
        2 => local_mixture_strategy(d),
    ]
}

fn wiring_strategy(d: usize) -> impl Strategy<Value = WiringSpec> {
    (
        prop::collection::vec(0..2usize, 2 * d),
        prop::collection::vec(0..2usize, 2 * d),
        prop::collection::vec(0..d, d * d),
        prop::collection::vec(0..d, d * d),
    )
        .prop_map(move |(fa, fb, ga, gb)| {
            WiringSpec::new(d, fa, fb, ga, gb).expect("tables are in range")
        })
}

fn dim_strategy() -> impl Strategy<Value = usize> {
    2..=5usize
}

proptest! {
    #[test]
    fn sampled_boxes_are_nonsignaling(
        b in dim_strategy().prop_flat_map(ns_box_strategy)
    ) {
        let report = b.validate_nonsignaling(1e-12);
        prop_assert!(report.pass(), "{report:?}");
    }

    #[test]
    fn wiring_preserves_nonsignaling(
        (first, second, spec) in dim_strategy().prop_flat_map(|d| (
            ns_box_strategy(d),
            ns_box_strategy(d),
            wiring_strategy(d),
        ))
    ) {
        let out = wire(&first, &second, &spec).unwrap();
        let report = out.validate_nonsignaling(1e-9);
        prop_assert!(report.pass(), "{report:?}");
        prop_assert!(report.normalization <= 1e-12);
    }

    #[test]
    fn wiring_is_bilinear(
        (p1, p2, q, spec, w) in dim_strategy().prop_flat_map(|d| (
            ns_box_strategy(d),
            ns_box_strategy(d),
            ns_box_strategy(d),
            wiring_strategy(d),
            0.0..1.0f64,
        ))
    ) {
        let mixed = NsBox::mix(&[p1.clone(), p2.clone()], &[w, 1.0 - w]).unwrap();

        let lhs = wire(&mixed, &q, &spec).unwrap();
        let rhs = NsBox::mix(
            &[wire(&p1, &q, &spec).unwrap(), wire(&p2, &q, &spec).unwrap()],
            &[w, 1.0 - w],
        )
        .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);

        let lhs = wire(&q, &mixed, &spec).unwrap();
        let rhs = NsBox::mix(
            &[wire(&q, &p1, &spec).unwrap(), wire(&q, &p2, &spec).unwrap()],
            &[w, 1.0 - w],
        )
        .unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-12);
    }

    #[test]
    fn cglmp_respects_algebraic_cap(
        b in dim_strategy().prop_flat_map(ns_box_strategy)
    ) {
        let report = nldist_core::cglmp_report(&b);
        prop_assert!(report.value <= 4.0 + 1e-9, "value {}", report.value);
        for e in report.correlators {
            prop_assert!(e.abs() <= 1.0 + 1e-12, "correlator {e}");
        }
    }

    #[test]
    fn cglmp_is_linear_in_mixtures(
        (p1, p2, w) in dim_strategy().prop_flat_map(|d| (
            ns_box_strategy(d),
            ns_box_strategy(d),
            0.0..1.0f64,
        ))
    ) {
        let mixed = NsBox::mix(&[p1.clone(), p2.clone()], &[w, 1.0 - w]).unwrap();
        let expected = w * p1.cglmp() + (1.0 - w) * p2.cglmp();
        prop_assert!((mixed.cglmp() - expected).abs() <= 1e-12);
    }

    #[test]
    fn decompose_recovers_affine_coefficients(
        (d, c_nl, c_lc, c_ld) in dim_strategy().prop_flat_map(|d| (
            Just(d),
            -0.3..1.3f64,
            -0.3..1.3f64,
            -0.3..1.3f64,
        ))
    ) {
        let coeffs = [c_nl, c_lc, c_ld, 1.0 - c_nl - c_lc - c_ld];
        let basis = NsBox::canonical_basis(d).unwrap();
        // Only coefficient choices that produce a proper distribution are
        // boxes at all; skip the rest.
        if let Ok(b) = NsBox::mix_affine(&basis, &coeffs) {
            let dec = b.decompose_affine();
            prop_assert!(dec.max_coefficient_diff(&coeffs) <= 1e-10, "{dec:?} vs {coeffs:?}");
            prop_assert!(dec.residual <= 1e-10);
        }
    }

    #[test]
    fn family_mixtures_have_affine_cglmp(
        (d, eps, family) in dim_strategy().prop_flat_map(|d| (
            Just(d),
            0.0..1.0f64,
            prop_oneof![Just(LocalFamily::Correlated), Just(LocalFamily::Deterministic)],
        ))
    ) {
        let params = MixtureParams::new(eps, d, family).unwrap();
        let b = build_mixture(&params).unwrap();
        prop_assert!((b.cglmp() - (2.0 + 2.0 * eps)).abs() <= 1e-12);
    }

    #[test]
    fn one_round_matches_prediction_on_family_mixtures(
        (d, eps, protocol) in dim_strategy().prop_flat_map(|d| (
            Just(d),
            0.0..1.0f64,
            prop_oneof![Just(Protocol::A), Just(Protocol::B)],
        ))
    ) {
        let params = MixtureParams::new(eps, d, protocol.family()).unwrap();
        let result = distill_once(&build_mixture(&params).unwrap(), protocol).unwrap();
        prop_assert!(result.oracle_residual.unwrap() <= 1e-10);
        let predicted = protocol.predict(eps, Dim::Finite(d)).unwrap();
        prop_assert!((result.epsilon_predicted.unwrap() - predicted).abs() <= 1e-10);
    }

    #[test]
    fn weight_maps_are_monotone_and_bounded(
        (lo, hi, d) in (0.0..1.0f64, 0.0..1.0f64, dim_strategy())
    ) {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        for protocol in [Protocol::A, Protocol::B] {
            for dim in [Dim::Finite(d), Dim::Infinite] {
                let a = protocol.predict(lo, dim).unwrap();
                let b = protocol.predict(hi, dim).unwrap();
                prop_assert!(a <= b + 1e-15, "{protocol} {dim:?}: {a} > {b}");
                prop_assert!((0.0..=1.0 + 1e-12).contains(&a));
                prop_assert!(a >= lo - 1e-15, "one round never loses weight");
            }
        }
    }
}

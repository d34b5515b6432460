//! Seeded random generators for the verification suite: nonsignaling boxes
//! away from the canonical span, arbitrary deterministic wirings, and
//! mixture weights. Everything is a pure function of the ChaCha stream, so
//! a fixed seed reproduces the full sample set.

use nldist_core::{NsBox, WiringSpec};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Independent per-sample stream: mixing the index in keeps results stable
/// under parallel iteration order.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// A random nonsignaling box: either a marginal-product table deformed by
/// a double-centered correction (exactly nonsignaling, generically outside
/// the canonical span) or a convex mixture of local deterministic
/// vertices, occasionally blended with the nonlocal vertex.
pub fn random_box(rng: &mut ChaCha8Rng, d: usize) -> NsBox {
    if rng.random_bool(0.6) {
        correction_box(rng, d)
    } else {
        vertex_mixture(rng, d)
    }
}

#[allow(clippy::needless_range_loop)]
fn correction_box(rng: &mut ChaCha8Rng, d: usize) -> NsBox {
    let mut marginal = |_: usize| -> Vec<f64> {
        let w: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..1.0)).collect();
        let sum: f64 = w.iter().sum();
        w.into_iter().map(|v| v / sum).collect()
    };
    let ma = [marginal(0), marginal(1)];
    let mb = [marginal(0), marginal(1)];

    let mut p = vec![0.0; 4 * d * d];
    let mut corr = vec![0.0; 4 * d * d];
    for x in 0..2 {
        for y in 0..2 {
            let slice = (x * 2 + y) * d * d;
            let raw: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut row = vec![0.0; d];
            let mut col = vec![0.0; d];
            let mut total = 0.0;
            for a in 0..d {
                for b in 0..d {
                    row[a] += raw[a * d + b];
                    col[b] += raw[a * d + b];
                    total += raw[a * d + b];
                }
            }
            for a in 0..d {
                for b in 0..d {
                    let i = slice + a * d + b;
                    p[i] = ma[x][a] * mb[y][b];
                    corr[i] = raw[a * d + b] - row[a] / d as f64 - col[b] / d as f64
                        + total / (d * d) as f64;
                }
            }
        }
    }

    // Largest nonnegativity-preserving step, capped so centering residue
    // stays negligible after scaling.
    let mut t_max = 2.0_f64;
    for (base, c) in p.iter().zip(&corr) {
        if *c < 0.0 {
            t_max = t_max.min(base / -c);
        }
    }
    let t = rng.random_range(0.0..0.9) * t_max;
    for (base, c) in p.iter_mut().zip(&corr) {
        *base += t * c;
    }
    NsBox::from_table(d, p).expect("shape is correct")
}

fn vertex_mixture(rng: &mut ChaCha8Rng, d: usize) -> NsBox {
    let k = rng.random_range(1..=5);
    let mut p = vec![0.0; 4 * d * d];
    let mut weights: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    let include_nonlocal = rng.random_bool(0.3);
    if include_nonlocal {
        weights.push(rng.random_range(0.05..1.0));
    }
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    for w in weights.iter().take(k) {
        let (a0, a1) = (rng.random_range(0..d), rng.random_range(0..d));
        let (b0, b1) = (rng.random_range(0..d), rng.random_range(0..d));
        for x in 0..2 {
            let a = if x == 0 { a0 } else { a1 };
            for y in 0..2 {
                let b = if y == 0 { b0 } else { b1 };
                p[((x * 2 + y) * d + a) * d + b] += w;
            }
        }
    }
    if include_nonlocal {
        let w = weights[k];
        let nl = NsBox::nonlocal(d).expect("valid dimension");
        for (entry, v) in p.iter_mut().zip(nl.table()) {
            *entry += w * v;
        }
    }
    NsBox::from_table(d, p).expect("shape is correct")
}

/// A uniformly random deterministic wiring.
pub fn random_wiring(rng: &mut ChaCha8Rng, d: usize) -> WiringSpec {
    let mut bits = |n: usize| -> Vec<usize> { (0..n).map(|_| rng.random_range(0..2)).collect() };
    let fa = bits(2 * d);
    let fb = bits(2 * d);
    let mut symbols = |n: usize| -> Vec<usize> { (0..n).map(|_| rng.random_range(0..d)).collect() };
    let ga = symbols(d * d);
    let gb = symbols(d * d);
    WiringSpec::new(d, fa, fb, ga, gb).expect("tables are in range")
}

/// Random convex weights over `k` components.
pub fn random_weights(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
    let sum: f64 = w.iter().sum();
    w.into_iter().map(|v| v / sum).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_boxes_validate_tightly() {
        for d in 2..=5 {
            for i in 0..50 {
                let mut rng = stream(11, i + 100 * d as u64);
                let b = random_box(&mut rng, d);
                let report = b.validate_nonsignaling(1e-12);
                assert!(report.pass(), "d={d} i={i}: {report:?}");
            }
        }
    }

    #[test]
    fn streams_are_reproducible_and_index_separated() {
        let d = 3;
        let a1 = random_box(&mut stream(7, 0), d);
        let a2 = random_box(&mut stream(7, 0), d);
        assert_eq!(a1.max_abs_diff(&a2).unwrap(), 0.0);
        let b = random_box(&mut stream(7, 1), d);
        assert!(a1.max_abs_diff(&b).unwrap() > 0.0);
    }

    #[test]
    fn random_wirings_are_valid() {
        for d in 2..=5 {
            let mut rng = stream(3, d as u64);
            let w = random_wiring(&mut rng, d);
            assert_eq!(w.d(), d);
        }
    }
}

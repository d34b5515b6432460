//! Local wirings: deterministic maps that feed one box's outputs into a
//! second box's inputs and merge the two output pairs into one.
//!
//! A wiring is given by four tables. On Alice's side `fa(x, a1)` chooses the
//! second box's input from her setting and the first output, and
//! `ga(a1, a2)` merges the two outputs; `fb`, `gb` mirror this on Bob's
//! side. Because each party acts on local data only, wired nonsignaling
//! boxes stay nonsignaling.
//!
//! The comparator wiring drives the distillation protocols: the second box
//! is queried with the real input only when the first output is the top
//! symbol `d − 1`, and outputs add modulo d with a fixed offset.

use alloc::vec::Vec;

use crate::boxes::NsBox;
use crate::Error;

/// Flags the top output symbol: 1 when `a = d − 1`, else 0.
pub fn comparator(a: usize, d: usize) -> Result<usize, Error> {
    if d < 2 {
        return Err(Error::DimensionTooSmall { d });
    }
    if a >= d {
        return Err(Error::SymbolOutOfRange { value: a, d });
    }
    Ok(usize::from(a == d - 1))
}

/// A deterministic wiring of two d-output boxes, stored as explicit tables.
///
/// `fa`/`fb` map `(input bit, first output)` to the second box's input bit;
/// `ga`/`gb` map `(first output, second output)` to the final output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WiringSpec {
    d: usize,
    fa: Vec<usize>,
    fb: Vec<usize>,
    ga: Vec<usize>,
    gb: Vec<usize>,
}

impl WiringSpec {
    /// Builds a wiring from flat tables: `fa` and `fb` in `(x, a1)`
    /// row-major order with length `2d`, `ga` and `gb` in `(a1, a2)`
    /// row-major order with length `d²`.
    pub fn new(
        d: usize,
        fa: Vec<usize>,
        fb: Vec<usize>,
        ga: Vec<usize>,
        gb: Vec<usize>,
    ) -> Result<Self, Error> {
        if d < 2 {
            return Err(Error::DimensionTooSmall { d });
        }
        for t in [&fa, &fb] {
            if t.len() != 2 * d {
                return Err(Error::TableShape {
                    expected: 2 * d,
                    actual: t.len(),
                });
            }
            if let Some(&v) = t.iter().find(|&&v| v > 1) {
                return Err(Error::BitOutOfRange { value: v });
            }
        }
        for t in [&ga, &gb] {
            if t.len() != d * d {
                return Err(Error::TableShape {
                    expected: d * d,
                    actual: t.len(),
                });
            }
            if let Some(&v) = t.iter().find(|&&v| v >= d) {
                return Err(Error::SymbolOutOfRange { value: v, d });
            }
        }
        Ok(WiringSpec { d, fa, fb, ga, gb })
    }

    /// The comparator wiring: `f(x, a1) = x · comparator(a1)` on both
    /// sides, outputs merged as `(a1 + a2 + offset) mod d`. Offset 0 and 1
    /// give the two distillation protocols.
    pub fn comparator(d: usize, offset: usize) -> Result<Self, Error> {
        if d < 2 {
            return Err(Error::DimensionTooSmall { d });
        }
        if offset >= d {
            return Err(Error::SymbolOutOfRange { value: offset, d });
        }
        let mut f = Vec::with_capacity(2 * d);
        for x in 0..2 {
            for a1 in 0..d {
                f.push(x * comparator(a1, d).expect("symbol in range"));
            }
        }
        let mut g = Vec::with_capacity(d * d);
        for a1 in 0..d {
            for a2 in 0..d {
                g.push((a1 + a2 + offset) % d);
            }
        }
        WiringSpec::new(d, f.clone(), f, g.clone(), g)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn fa(&self, x: usize, a1: usize) -> usize {
        self.fa[x * self.d + a1]
    }

    pub fn fb(&self, y: usize, b1: usize) -> usize {
        self.fb[y * self.d + b1]
    }

    pub fn ga(&self, a1: usize, a2: usize) -> usize {
        self.ga[a1 * self.d + a2]
    }

    pub fn gb(&self, b1: usize, b2: usize) -> usize {
        self.gb[b1 * self.d + b2]
    }

    /// The four tables in constructor order `(fa, fb, ga, gb)`.
    pub fn tables(&self) -> (&[usize], &[usize], &[usize], &[usize]) {
        (&self.fa, &self.fb, &self.ga, &self.gb)
    }
}

/// Shorthand for [`WiringSpec::comparator`].
pub fn comparator_wiring(d: usize, offset: usize) -> Result<WiringSpec, Error> {
    WiringSpec::comparator(d, offset)
}

/// Composes two boxes under a wiring by exact summation:
///
/// ```text
/// P(a, b | x, y) = Σ P1(a1, b1 | x, y) · P2(a2, b2 | fa(x, a1), fb(y, b1))
/// ```
///
/// over all `(a1, b1, a2, b2)` with `ga(a1, a2) = a` and `gb(b1, b2) = b`.
/// The sum is bilinear in the two boxes and maps nonsignaling inputs to a
/// nonsignaling output.
pub fn wire(first: &NsBox, second: &NsBox, spec: &WiringSpec) -> Result<NsBox, Error> {
    let d = spec.d();
    if first.d() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: first.d(),
        });
    }
    if second.d() != d {
        return Err(Error::DimensionMismatch {
            left: d,
            right: second.d(),
        });
    }
    let mut p = alloc::vec![0.0; 4 * d * d];
    for x in 0..2 {
        for y in 0..2 {
            for a1 in 0..d {
                let x2 = spec.fa(x, a1);
                for b1 in 0..d {
                    let w1 = first.prob(x, y, a1, b1);
                    if w1 == 0.0 {
                        continue;
                    }
                    let y2 = spec.fb(y, b1);
                    for a2 in 0..d {
                        let a = spec.ga(a1, a2);
                        for b2 in 0..d {
                            let b = spec.gb(b1, b2);
                            p[((x * 2 + y) * d + a) * d + b] += w1 * second.prob(x2, y2, a2, b2);
                        }
                    }
                }
            }
        }
    }
    NsBox::from_computed(d, p)
}

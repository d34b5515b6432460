//! On-disk JSON shapes: boxes as nested `[x][y][a][b]` probability arrays,
//! wirings as nested lookup tables, plus the report objects the
//! subcommands print.

use nldist_core::{AffineDecomposition, CglmpReport, NsBox, WiringSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Interchange form of a box: `{ "d": n, "p": [[[[...]]]] }`.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct BoxFile {
    pub d: usize,
    pub p: Vec<Vec<Vec<Vec<f64>>>>,
}

impl BoxFile {
    pub fn from_box(b: &NsBox) -> Self {
        let d = b.d();
        let p = (0..2)
            .map(|x| {
                (0..2)
                    .map(|y| {
                        (0..d)
                            .map(|a| (0..d).map(|bb| b.prob(x, y, a, bb)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        BoxFile { d, p }
    }

    pub fn into_box(self) -> Result<NsBox, CliError> {
        let d = self.d;
        let shape_err = || CliError::usage(format!("box table is not shaped [2][2][{d}][{d}]"));
        if self.p.len() != 2 {
            return Err(shape_err());
        }
        let mut flat = Vec::with_capacity(4 * d * d);
        for per_x in &self.p {
            if per_x.len() != 2 {
                return Err(shape_err());
            }
            for per_y in per_x {
                if per_y.len() != d {
                    return Err(shape_err());
                }
                for row in per_y {
                    if row.len() != d {
                        return Err(shape_err());
                    }
                    flat.extend_from_slice(row);
                }
            }
        }
        NsBox::from_table(d, flat).map_err(|e| CliError::usage(format!("invalid box table: {e}")))
    }
}

/// Interchange form of a wiring: tables indexed `[input][first-output]`.
#[derive(Serialize, Deserialize, Debug, Clone)]
pub struct WiringFile {
    pub d: usize,
    pub fa: Vec<Vec<usize>>,
    pub fb: Vec<Vec<usize>>,
    pub ga: Vec<Vec<usize>>,
    pub gb: Vec<Vec<usize>>,
}

fn flatten(
    table: &[Vec<usize>],
    rows: usize,
    cols: usize,
    name: &str,
) -> Result<Vec<usize>, CliError> {
    if table.len() != rows || table.iter().any(|r| r.len() != cols) {
        return Err(CliError::usage(format!(
            "wiring table {name} is not shaped [{rows}][{cols}]"
        )));
    }
    Ok(table.iter().flatten().copied().collect())
}

impl WiringFile {
    pub fn from_spec(spec: &WiringSpec) -> Self {
        let d = spec.d();
        let (fa, fb, ga, gb) = spec.tables();
        let nest = |t: &[usize], cols: usize| -> Vec<Vec<usize>> {
            t.chunks(cols).map(|c| c.to_vec()).collect()
        };
        WiringFile {
            d,
            fa: nest(fa, d),
            fb: nest(fb, d),
            ga: nest(ga, d),
            gb: nest(gb, d),
        }
    }

    pub fn into_spec(self) -> Result<WiringSpec, CliError> {
        let d = self.d;
        let fa = flatten(&self.fa, 2, d, "fa")?;
        let fb = flatten(&self.fb, 2, d, "fb")?;
        let ga = flatten(&self.ga, d, d, "ga")?;
        let gb = flatten(&self.gb, d, d, "gb")?;
        WiringSpec::new(d, fa, fb, ga, gb)
            .map_err(|e| CliError::usage(format!("invalid wiring: {e}")))
    }
}

/// `cglmp` report: correlators as the `E[x][y]` table plus the combined
/// value and a nonsignaling audit of the input.
#[derive(Serialize, Debug)]
pub struct CglmpOutput {
    pub d: usize,
    pub correlators: [[f64; 2]; 2],
    pub value: f64,
    pub nonsignaling: NsAudit,
}

#[derive(Serialize, Debug)]
pub struct NsAudit {
    pub tol: f64,
    pub worst_violation: f64,
    pub pass: bool,
}

impl CglmpOutput {
    pub fn new(report: &CglmpReport, b: &NsBox, tol: f64) -> Self {
        let [e00, e01, e10, e11] = report.correlators;
        let audit = b.validate_nonsignaling(tol);
        CglmpOutput {
            d: report.d,
            correlators: [[e00, e01], [e10, e11]],
            value: report.value,
            nonsignaling: NsAudit {
                tol,
                worst_violation: audit.worst(),
                pass: audit.pass(),
            },
        }
    }
}

/// `distill` report. Closed-form fields appear only when the input box was
/// recognized as the protocol's two-box mixture.
#[derive(Serialize, Debug)]
pub struct DistillOutput {
    pub protocol: String,
    pub wiring: String,
    pub d: usize,
    pub cglmp_initial: f64,
    pub cglmp_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_initial: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon_predicted: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_residual: Option<f64>,
    pub output_box: BoxFile,
}

/// `iterate` report: the whole trajectory.
#[derive(Serialize, Debug)]
pub struct IterateOutput {
    pub protocol: String,
    pub family: String,
    pub d: usize,
    pub rounds: usize,
    pub trajectory: Vec<TrajectoryRow>,
}

#[derive(Serialize, Debug)]
pub struct TrajectoryRow {
    pub round: usize,
    /// Source boxes consumed: 2^round. A string because it outgrows JSON
    /// number precision past round 53.
    pub copies: String,
    pub epsilon: f64,
    pub cglmp: f64,
    pub oracle_gap: f64,
}

/// `noisy` report: oracle round next to the closed forms.
#[derive(Serialize, Debug)]
pub struct NoisyOutput {
    pub protocol: String,
    pub family: String,
    pub d: usize,
    pub xi: f64,
    pub gamma: f64,
    pub mu: f64,
    pub cglmp_initial: f64,
    pub cglmp_final: f64,
    pub predicted_cglmp: f64,
    /// `[NL, Lc, Ld, 𝟙]` from the closed form.
    pub predicted_coefficients: [f64; 4],
    /// Same basis, least-squares fit of the composed table.
    pub oracle_coefficients: [f64; 4],
    pub decomposition_residual: f64,
    pub oracle_gap: f64,
    pub output_box: BoxFile,
}

/// Decomposition in report form.
pub fn coefficients_of(dec: &AffineDecomposition) -> [f64; 4] {
    dec.coefficients()
}

//! Subcommand grammar and implementations.
//!
//! Every command writes its primary result to `-o FILE` when given, or to
//! the supplied writer (stdout in the binary). Reports are pretty JSON;
//! sweeps and region maps are CSV with 12-significant-digit values so
//! identical configurations reproduce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nldist_core::{
    build_mixture, cglmp_report, distill_iterate, distill_noisy, distill_once, efficiency_curve,
    simplex_grid, wire, works_region, Dim, LocalFamily, MixtureParams, NoisyParams, NsBox,
    Protocol, WiringSpec,
};
use serde::Serialize;

use crate::formats::{
    coefficients_of, BoxFile, CglmpOutput, DistillOutput, IterateOutput, NoisyOutput,
    TrajectoryRow, WiringFile,
};
use crate::numfmt::fmt_sig;
use crate::verify::{self, Suite, VerifyConfig};
use crate::CliError;

/// Digits carried into CSV files; enough to round-trip any value that two
/// runs could legitimately share.
const CSV_DIGITS: usize = 12;

#[derive(Parser, Debug)]
#[command(
    name = "nldist",
    version,
    about = "Bipartite nonsignaling boxes: CGLMP evaluation, comparator wirings, \
             and nonlocality distillation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Emit a canonical box or a two-box mixture as JSON.
    Gen(GenArgs),
    /// Evaluate the CGLMP functional of a box, with a nonsignaling audit.
    Cglmp(CglmpArgs),
    /// Wire a box with itself for one round and report the outcome.
    Distill(DistillArgs),
    /// Iterate a protocol on a two-box mixture, tracking the trajectory.
    Iterate(IterateArgs),
    /// One protocol round on a noise-diluted mixture, with closed-form
    /// cross-checks.
    Noisy(NoisyArgs),
    /// Efficiency sweep over dimensions and starting weights (CSV).
    Sweep(SweepArgs),
    /// Map where one noisy round strictly gains CGLMP value (CSV).
    Region(RegionArgs),
    /// Run the oracle-versus-closed-form self-check suite.
    Verify(VerifyArgs),
}

/// The canonical boxes, as spelled on the command line.
#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum BoxKind {
    Nl,
    Lc,
    Ld,
    Mixed,
}

impl BoxKind {
    fn local_family(self) -> Option<LocalFamily> {
        match self {
            BoxKind::Lc => Some(LocalFamily::Correlated),
            BoxKind::Ld => Some(LocalFamily::Deterministic),
            BoxKind::Nl | BoxKind::Mixed => None,
        }
    }

    fn build(self, d: usize) -> Result<NsBox, CliError> {
        match self {
            BoxKind::Nl => NsBox::nonlocal(d),
            BoxKind::Lc => NsBox::local_correlated(d),
            BoxKind::Ld => NsBox::local_deterministic(d),
            BoxKind::Mixed => NsBox::fully_mixed(d),
        }
        .map_err(usage)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "UPPER")]
pub enum ProtocolArg {
    #[value(alias = "a")]
    A,
    #[value(alias = "b")]
    B,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Protocol {
        match p {
            ProtocolArg::A => Protocol::A,
            ProtocolArg::B => Protocol::B,
        }
    }
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Which box to build.
    #[arg(long, value_enum)]
    pub family: BoxKind,
    /// Output alphabet size (>= 2).
    #[arg(long)]
    pub d: usize,
    /// Nonlocal weight: emit `eps NL + (1 - eps) local` (lc/ld only).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CglmpArgs {
    /// Box JSON file to evaluate (alternative to --family/--d).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<BoxKind>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Nonsignaling audit tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DistillArgs {
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    /// Box JSON file to distill (alternative to --epsilon/--family/--d).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum)]
    pub family: Option<BoxKind>,
    #[arg(long)]
    pub d: Option<usize>,
    /// Composition wiring: comparator-A, comparator-B, or a wiring JSON
    /// path. Defaults to the protocol's own comparator; closed-form
    /// predictions attach only in that case.
    #[arg(long)]
    pub wiring: Option<String>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IterateArgs {
    #[arg(long, value_enum)]
    pub protocol: ProtocolArg,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub rounds: usize,
    /// Local side of the mixture; defaults to the protocol's own family.
    #[arg(long, value_enum)]
    pub family: Option<BoxKind>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct NoisyArgs {
    #[arg(long)]
    pub xi: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub d: usize,
    /// Local side of the mixture: lc or ld (default ld).
    #[arg(long, value_enum)]
    pub family: Option<BoxKind>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Protocols to sweep (default: both).
    #[arg(long = "protocol", value_enum)]
    pub protocols: Vec<ProtocolArg>,
    /// Dimensions, integers >= 2 or "inf"; repeatable or comma separated.
    #[arg(long = "d", value_parser = parse_dim, value_delimiter = ',', required = true)]
    pub dims: Vec<Dim>,
    /// Evenly spaced starting weights on [0, 1], endpoints included.
    #[arg(long, default_value_t = 21)]
    pub steps: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RegionArgs {
    /// Dimension, an integer >= 2 or "inf".
    #[arg(long, value_parser = parse_dim, default_value = "inf")]
    pub d: Dim,
    /// Per-axis resolution of the weight simplex.
    #[arg(long, default_value_t = 200)]
    pub grid: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Check group to run.
    #[arg(long, value_parser = parse_suite, default_value = "all")]
    pub suite: Suite,
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 20260814)]
    pub seed: u64,
    /// Sample budget per randomized check.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Bound on structural violations of randomized outputs.
    #[arg(long = "tol-invariant", default_value_t = 1e-9)]
    pub invariant_tol: f64,
    /// Bound on closed-form-versus-table gaps.
    #[arg(long = "tol-oracle", default_value_t = 1e-12)]
    pub oracle_tol: f64,
}

fn parse_dim(s: &str) -> Result<Dim, String> {
    if s == "inf" {
        return Ok(Dim::Infinite);
    }
    let d: usize = s
        .parse()
        .map_err(|_| format!("expected an integer >= 2 or 'inf', got '{s}'"))?;
    if d < 2 {
        return Err(format!("dimension must be >= 2, got {d}"));
    }
    Ok(Dim::Finite(d))
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse()
}

fn usage(e: impl core::fmt::Display) -> CliError {
    CliError::usage(e.to_string())
}

/// Applies the NLDIST_THREADS cap to the global worker pool. Call once,
/// before any parallel work.
pub fn configure_threads() -> Result<(), CliError> {
    let value = match std::env::var("NLDIST_THREADS") {
        Ok(v) => v,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(CliError::usage(format!("NLDIST_THREADS: {e}"))),
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| {
            CliError::usage(format!(
                "NLDIST_THREADS must be a positive integer, got '{value}'"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::failure(format!("thread pool: {e}")))
}

/// Dispatches a parsed invocation. `out` receives whatever is not
/// redirected to a file.
pub fn execute(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Gen(args) => gen(args, out),
        Command::Cglmp(args) => cglmp(args, out),
        Command::Distill(args) => distill(args, out),
        Command::Iterate(args) => iterate(args, out),
        Command::Noisy(args) => noisy(args, out),
        Command::Sweep(args) => sweep(args, out),
        Command::Region(args) => region(args, out),
        Command::Verify(args) => verify_cmd(args, out),
    }
}

fn sink(
    path: &Option<PathBuf>,
    out: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| CliError::failure(format!("cannot create {}: {e}", p.display())))?;
            let mut buffered = BufWriter::new(file);
            write(&mut buffered)?;
            buffered.flush()?;
            Ok(())
        }
        None => write(out),
    }
}

fn write_json<T: Serialize>(w: &mut dyn Write, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| {
        if e.io_error_kind() == Some(std::io::ErrorKind::BrokenPipe) {
            CliError::Pipe
        } else {
            CliError::failure(format!("serialize: {e}"))
        }
    })?;
    writeln!(w)?;
    Ok(())
}

fn read_box(path: &Path) -> Result<NsBox, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let file: BoxFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    file.into_box()
}

fn read_wiring(path: &Path) -> Result<WiringSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let file: WiringFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    file.into_spec()
}

/// Builds the box a user asked for: pure canonical box, or the two-box
/// mixture when `--epsilon` is present.
fn build_box(kind: BoxKind, d: usize, epsilon: Option<f64>) -> Result<NsBox, CliError> {
    match epsilon {
        None => kind.build(d),
        Some(eps) => {
            let family = kind.local_family().ok_or_else(|| {
                CliError::usage(
                    "--epsilon builds eps NL + (1 - eps) local and needs --family lc or ld",
                )
            })?;
            let params = MixtureParams::new(eps, d, family).map_err(usage)?;
            build_mixture(&params).map_err(CliError::from)
        }
    }
}

/// Resolves the `--input FILE` versus `--family/--d/--epsilon` choice.
fn obtain_box(
    input: &Option<PathBuf>,
    family: Option<BoxKind>,
    d: Option<usize>,
    epsilon: Option<f64>,
) -> Result<NsBox, CliError> {
    match (input, family) {
        (Some(path), None) => {
            if d.is_some() || epsilon.is_some() {
                return Err(CliError::usage("--input conflicts with --d and --epsilon"));
            }
            read_box(path)
        }
        (Some(_), Some(_)) => Err(CliError::usage("--input conflicts with --family")),
        (None, Some(kind)) => {
            let d = d.ok_or_else(|| CliError::usage("--family needs --d"))?;
            build_box(kind, d, epsilon)
        }
        (None, None) => Err(CliError::usage("provide --input FILE or --family with --d")),
    }
}

fn gen(args: GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let b = build_box(args.family, args.d, args.epsilon)?;
    sink(&args.output, out, |w| write_json(w, &BoxFile::from_box(&b)))
}

fn cglmp(args: CglmpArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(CliError::usage(format!(
            "--tol must be positive, got {}",
            args.tol
        )));
    }
    let b = obtain_box(&args.input, args.family, args.d, args.epsilon)?;
    let report = cglmp_report(&b);
    let output = CglmpOutput::new(&report, &b, args.tol);
    sink(&args.output, out, |w| write_json(w, &output))
}

enum WiringChoice {
    Named(Protocol),
    File(PathBuf),
}

fn parse_wiring(s: &str) -> WiringChoice {
    match s {
        "comparator-A" | "comparator-a" => WiringChoice::Named(Protocol::A),
        "comparator-B" | "comparator-b" => WiringChoice::Named(Protocol::B),
        path => WiringChoice::File(PathBuf::from(path)),
    }
}

fn distill(args: DistillArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let input = obtain_box(&args.input, args.family, args.d, args.epsilon)?;
    let protocol: Protocol = args.protocol.into();
    let d = input.d();

    // The protocol's own comparator gets the full closed-form treatment;
    // any other wiring is composed as-is.
    let (label, override_spec) = match args.wiring.as_deref().map(parse_wiring) {
        None => (format!("comparator-{protocol}"), None),
        Some(WiringChoice::Named(p)) => {
            let spec = if p == protocol {
                None
            } else {
                Some(p.wiring(d).map_err(usage)?)
            };
            (format!("comparator-{p}"), spec)
        }
        Some(WiringChoice::File(path)) => {
            let spec = read_wiring(&path)?;
            if spec.d() != d {
                return Err(CliError::usage(format!(
                    "wiring dimension {} does not match box dimension {d}",
                    spec.d()
                )));
            }
            (path.display().to_string(), Some(spec))
        }
    };

    let output = match override_spec {
        None => {
            let res = distill_once(&input, protocol)?;
            DistillOutput {
                protocol: protocol.to_string(),
                wiring: label,
                d,
                cglmp_initial: res.cglmp_initial,
                cglmp_final: res.cglmp_final,
                epsilon_initial: res.epsilon_initial,
                epsilon_predicted: res.epsilon_predicted,
                oracle_residual: res.oracle_residual,
                output_box: BoxFile::from_box(&res.output),
            }
        }
        Some(spec) => {
            let composed = wire(&input, &input, &spec)?;
            DistillOutput {
                protocol: protocol.to_string(),
                wiring: label,
                d,
                cglmp_initial: input.cglmp(),
                cglmp_final: composed.cglmp(),
                epsilon_initial: None,
                epsilon_predicted: None,
                oracle_residual: None,
                output_box: BoxFile::from_box(&composed),
            }
        }
    };
    sink(&args.output, out, |w| write_json(w, &output))
}

fn iterate(args: IterateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let protocol: Protocol = args.protocol.into();
    let family = match args.family {
        None => protocol.family(),
        Some(kind) => kind
            .local_family()
            .ok_or_else(|| CliError::usage("--family must be lc or ld"))?,
    };
    if family != protocol.family() {
        return Err(CliError::usage(format!(
            "protocol {protocol} distills {} mixtures, not {family}",
            protocol.family()
        )));
    }
    let params = MixtureParams::new(args.epsilon, args.d, family).map_err(usage)?;
    let trajectory = distill_iterate(&params, protocol, args.rounds)?;
    let output = IterateOutput {
        protocol: protocol.to_string(),
        family: family.to_string(),
        d: args.d,
        rounds: args.rounds,
        trajectory: trajectory
            .iter()
            .map(|p| TrajectoryRow {
                round: p.round,
                copies: p.copies.to_string(),
                epsilon: p.epsilon,
                cglmp: p.cglmp,
                oracle_gap: p.oracle_gap,
            })
            .collect(),
    };
    sink(&args.output, out, |w| write_json(w, &output))
}

fn noisy(args: NoisyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let family = match args.family {
        None => LocalFamily::Deterministic,
        Some(kind) => kind
            .local_family()
            .ok_or_else(|| CliError::usage("--family must be lc or ld"))?,
    };
    let params =
        NoisyParams::new(args.xi, args.gamma, Dim::Finite(args.d), family).map_err(usage)?;
    let res = distill_noisy(&params)?;
    let output = NoisyOutput {
        protocol: res.protocol.to_string(),
        family: family.to_string(),
        d: args.d,
        xi: args.xi,
        gamma: args.gamma,
        mu: params.mu(),
        cglmp_initial: res.cglmp_initial,
        cglmp_final: res.cglmp_final,
        predicted_cglmp: res.predicted_cglmp,
        predicted_coefficients: res.predicted_coefficients,
        oracle_coefficients: coefficients_of(&res.decomposition),
        decomposition_residual: res.decomposition.residual,
        oracle_gap: res.oracle_gap,
        output_box: BoxFile::from_box(&res.output),
    };
    sink(&args.output, out, |w| write_json(w, &output))
}

fn sweep(args: SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.steps < 2 {
        return Err(CliError::usage(format!(
            "--steps must be >= 2, got {}",
            args.steps
        )));
    }
    let mut protocols: Vec<Protocol> = args.protocols.iter().map(|&p| Protocol::from(p)).collect();
    if protocols.is_empty() {
        protocols = vec![Protocol::A, Protocol::B];
    }
    protocols.dedup();
    let mut dims: Vec<Dim> = Vec::new();
    for &d in &args.dims {
        if !dims.contains(&d) {
            dims.push(d);
        }
    }
    let epsilons: Vec<f64> = (0..args.steps)
        .map(|k| k as f64 / (args.steps - 1) as f64)
        .collect();
    let grid = efficiency_curve(&protocols, &dims, &epsilons).map_err(usage)?;

    sink(&args.output, out, |w| {
        writeln!(w, "protocol,d,epsilon,cglmp_initial,cglmp_final")?;
        for row in &grid.rows {
            writeln!(
                w,
                "{},{},{},{},{}",
                row.protocol,
                row.d,
                fmt_sig(row.epsilon, CSV_DIGITS),
                fmt_sig(row.cglmp_initial, CSV_DIGITS),
                fmt_sig(row.cglmp_final, CSV_DIGITS)
            )?;
        }
        Ok(())
    })
}

fn region(args: RegionArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cells = simplex_grid(args.grid)
        .map_err(|_| CliError::usage(format!("--grid must be >= 2, got {}", args.grid)))?;
    sink(&args.output, out, |w| {
        writeln!(w, "xi,gamma,d,cglmp_initial,cglmp_final,works")?;
        for (xi, gamma) in cells {
            let p = works_region(xi, gamma, args.d)?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt_sig(xi, CSV_DIGITS),
                fmt_sig(gamma, CSV_DIGITS),
                args.d,
                fmt_sig(p.cglmp_initial, CSV_DIGITS),
                fmt_sig(p.cglmp_final, CSV_DIGITS),
                p.works
            )?;
        }
        Ok(())
    })
}

fn verify_cmd(args: VerifyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    for (flag, value) in [
        ("--tol-invariant", args.invariant_tol),
        ("--tol-oracle", args.oracle_tol),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(CliError::usage(format!(
                "{flag} must be positive, got {value}"
            )));
        }
    }
    if args.samples == 0 {
        return Err(CliError::usage("--samples must be >= 1"));
    }
    let cfg = VerifyConfig {
        suite: args.suite,
        seed: args.seed,
        samples: args.samples,
        invariant_tol: args.invariant_tol,
        oracle_tol: args.oracle_tol,
    };
    let outcomes = verify::run_suite(&cfg);
    let mut failed = 0usize;
    for outcome in &outcomes {
        let (tag, detail) = match &outcome.result {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failed += 1;
                ("FAIL", detail)
            }
        };
        writeln!(out, "[{tag}] {}: {detail}", outcome.name)?;
    }
    writeln!(
        out,
        "verify: {} checks, {failed} failed (suite {}, seed {})",
        outcomes.len(),
        cfg.suite,
        cfg.seed
    )?;
    if failed > 0 {
        return Err(CliError::failure(format!(
            "{failed} verification checks failed"
        )));
    }
    Ok(())
}

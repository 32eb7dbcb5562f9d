//! `gkdv` — experiment runner for the truncated quartic gKdV verification
//! suite. Every run writes a JSON manifest next to its artifacts so any
//! result can be reproduced from the recorded configuration.
//!
//! Exit codes: 0 = success, 1 = a diagnostic failed its threshold,
//! 2 = usage/configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use gkdv_core::error::Error as CoreError;
use gkdv_core::flow::{cauchy_rate, evolve, FlowConfig, Variant};
use gkdv_core::gauge::{apply_gauge, Direction};
use gkdv_core::invariance::{conservation_report, invariance_test, jacobian_det, vector_field_divergence};
use gkdv_core::io;
use gkdv_core::observable::Observable;
use gkdv_core::resonance::{
    cancellation_identity_check, count_resonant_tuples, kdv_factorization_check, quad_roots,
    verify_zeta2_lower_bound, CountingLemma,
};
use gkdv_core::sampler::{sample_gibbs_ensemble, sample_wiener, WienerSpec};
use gkdv_core::spectral::project;
use gkdv_core::xsb::{smoothing_diagnostic, spacetime_spectrum, xsb_norm, NormKind, Window, XsbSpec};

#[derive(Parser)]
#[command(name = "gkdv", version, about = "Frequency-truncated quartic gKdV simulator and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a weighted Gibbs ensemble from the Wiener reference measure
    Sample(SampleArgs),
    /// Evolve an initial field under the truncated flow
    Evolve(EvolveArgs),
    /// Apply the gauge transformation (or its inverse) to a trajectory
    Gauge(GaugeArgs),
    /// Check L2 and Hamiltonian conservation along a trajectory
    Conserve(ConserveArgs),
    /// Check the Liouville mechanism: vector-field divergence and flow-map Jacobian
    Liouville(LiouvilleArgs),
    /// Monte-Carlo test of measure invariance under the truncated flow
    Invariance(InvarianceArgs),
    /// Nonlinear-smoothing diagnostic across truncation levels
    Smoothing(SmoothingArgs),
    /// Truncation Cauchy-rate study
    Cauchy(CauchyArgs),
    /// Evaluate a space-time norm of a trajectory
    Xsb(XsbArgs),
    /// Arithmetic identities and counting bounds for the resonance analysis
    #[command(subcommand)]
    Resonance(ResonanceCmd),
    /// Summarize the artifacts in an output directory
    Report(ReportArgs),
}

#[derive(Args, Serialize)]
struct SampleArgs {
    /// truncation level N
    #[arg(long)]
    modes: usize,
    /// ensemble size M
    #[arg(long)]
    count: usize,
    /// L2 cutoff B
    #[arg(long)]
    cutoff: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct EvolveArgs {
    /// initial field (.gkdv binary or .json)
    #[arg(long = "in")]
    input: PathBuf,
    /// truncation level N (input is projected to this band)
    #[arg(long)]
    modes: usize,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    horizon: f64,
    #[arg(long, value_enum, default_value_t = VariantArg::Gauged)]
    variant: VariantArg,
    /// nonlinearity coefficient override (0 selects the linear flow)
    #[arg(long)]
    coeff: Option<f64>,
    /// keep every k-th step (0 = automatic)
    #[arg(long, default_value_t = 0)]
    stride: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct GaugeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum)]
    direction: DirectionArg,
    #[arg(long)]
    out: PathBuf,
    /// optional CSV of the accumulated shift alpha(t)
    #[arg(long)]
    alpha_out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct ConserveArgs {
    #[arg(long)]
    traj: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// fail (exit 1) when the relative L2 drift exceeds this bound
    #[arg(long)]
    max_l2_drift: Option<f64>,
    /// fail (exit 1) when the relative Hamiltonian drift exceeds this bound
    #[arg(long)]
    max_h_drift: Option<f64>,
}

#[derive(Args, Serialize)]
struct LiouvilleArgs {
    /// truncation level N (Jacobian check requires N <= 6)
    #[arg(long)]
    modes: usize,
    /// flow time for the Jacobian determinant
    #[arg(long)]
    time: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2e-3)]
    dt: f64,
    #[arg(long, default_value_t = 1e-5)]
    det_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    div_tol: f64,
}

#[derive(Args, Serialize)]
struct InvarianceArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    dt: f64,
    /// observable expression, repeatable (e.g. -o "clamp(abs2(2),10)")
    #[arg(long = "observable", short = 'o')]
    observables: Vec<String>,
    /// rescale every coefficient before evolving (negative control)
    #[arg(long)]
    perturb: Option<f64>,
    #[arg(long, default_value_t = 3.0)]
    z_max: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct SmoothingArgs {
    #[arg(long)]
    ensemble: PathBuf,
    #[arg(long)]
    delta: f64,
    /// strictly increasing truncation levels, e.g. 16,32,64
    #[arg(long, value_delimiter = ',')]
    modes_list: Vec<usize>,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    dt: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct CauchyArgs {
    /// initial field (.gkdv binary or .json)
    #[arg(long = "in")]
    input: PathBuf,
    /// doubling truncation levels, e.g. 8,16,32
    #[arg(long, value_delimiter = ',')]
    modes_list: Vec<usize>,
    #[arg(long, default_value_t = 0.55)]
    s: f64,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    dt: f64,
}

#[derive(Args, Serialize)]
struct XsbArgs {
    #[arg(long)]
    traj: PathBuf,
    #[arg(long)]
    s: f64,
    #[arg(long)]
    b: f64,
    #[arg(long, value_enum, default_value_t = KindArg::X)]
    kind: KindArg,
    #[arg(long, value_enum, default_value_t = WindowArg::Hann)]
    window: WindowArg,
}

#[derive(Subcommand)]
enum ResonanceCmd {
    /// Verify |Omega| >= n_max^2 on the two-coincidence set
    VerifyZeta2 {
        #[arg(long, default_value_t = 32)]
        max: i64,
    },
    /// Exact enumeration of a counting-lemma bound at dyadic shell sizes
    Count {
        #[arg(long, value_enum)]
        lemma: LemmaArg,
        /// dyadic shell sizes, e.g. 8,8,8,8 (L1bi) or 8,8,8,8,8 (L2ci)
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
    },
    /// Residual of the paired-denominator cancellation identity
    Cancel {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Run the whole identity suite up to a frequency budget
    Suite {
        #[arg(long, default_value_t = 16)]
        max: i64,
    },
}

#[derive(Args, Serialize)]
struct ReportArgs {
    /// artifact directory containing manifests
    dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum VariantArg {
    Gauged,
    Ungauged,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Gauged => Variant::Gauged,
            VariantArg::Ungauged => Variant::Ungauged,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum DirectionArg {
    Forward,
    Inverse,
}

impl From<DirectionArg> for Direction {
    fn from(v: DirectionArg) -> Self {
        match v {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Inverse => Direction::Inverse,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum KindArg {
    X,
    Y,
    Z,
}

impl From<KindArg> for NormKind {
    fn from(v: KindArg) -> Self {
        match v {
            KindArg::X => NormKind::X,
            KindArg::Y => NormKind::Y,
            KindArg::Z => NormKind::Z,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum WindowArg {
    Hann,
    Box,
}

impl From<WindowArg> for Window {
    fn from(v: WindowArg) -> Self {
        match v {
            WindowArg::Hann => Window::Hann,
            WindowArg::Box => Window::Box,
        }
    }
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
enum LemmaArg {
    L1bi,
    L2ci,
}

impl From<LemmaArg> for CountingLemma {
    fn from(v: LemmaArg) -> Self {
        match v {
            LemmaArg::L1bi => CountingLemma::L1bi,
            LemmaArg::L2ci => CountingLemma::L2ci,
        }
    }
}

/// Outcome of a subcommand that ran to completion.
enum Outcome {
    Pass,
    /// a diagnostic ran but failed its threshold
    Fail(String),
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter(_)
            | CoreError::ObservableParse(_)
            | CoreError::GridTooSmall { .. }
            | CoreError::BudgetExceeded(_)
            | CoreError::Format(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult = Result<Outcome, CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Pass) => ExitCode::from(0),
        Ok(Outcome::Fail(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

/// Reproducibility record written next to every artifact.
#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    unix_time: u64,
    elapsed_seconds: f64,
    config: &'a T,
}

fn write_manifest<T: Serialize>(
    artifact: &Path,
    command: &str,
    config: &T,
    started: Instant,
) -> Result<(), CliError> {
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        unix_time: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        elapsed_seconds: started.elapsed().as_secs_f64(),
        config,
    };
    let mut path = artifact.as_os_str().to_owned();
    path.push(".manifest.json");
    let path = PathBuf::from(path);
    io::atomic_write(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, &manifest)?;
        w.write_all(b"\n")?;
        Ok(())
    })?;
    Ok(())
}

/// Default directory for artifacts of commands that take no --out.
fn output_root() -> PathBuf {
    std::env::var_os("GKDV_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn read_field_any(path: &Path) -> Result<gkdv_core::spectral::SpectralField, CliError> {
    let field = if path.extension().is_some_and(|e| e == "json") {
        io::read_field_json(path)?
    } else {
        io::read_field(path)?
    };
    Ok(field)
}

fn run(cmd: Command) -> CliResult {
    match cmd {
        Command::Sample(a) => cmd_sample(a),
        Command::Evolve(a) => cmd_evolve(a),
        Command::Gauge(a) => cmd_gauge(a),
        Command::Conserve(a) => cmd_conserve(a),
        Command::Liouville(a) => cmd_liouville(a),
        Command::Invariance(a) => cmd_invariance(a),
        Command::Smoothing(a) => cmd_smoothing(a),
        Command::Cauchy(a) => cmd_cauchy(a),
        Command::Xsb(a) => cmd_xsb(a),
        Command::Resonance(a) => cmd_resonance(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn cmd_sample(a: SampleArgs) -> CliResult {
    let started = Instant::now();
    let spec = WienerSpec::new(a.modes, a.seed, a.stream);
    let ens = sample_gibbs_ensemble(&spec, a.cutoff, a.count)?;
    io::write_ensemble(&a.out, &ens)?;
    write_manifest(&a.out, "sample", &a, started)?;
    println!(
        "wrote {} samples at N = {} (ESS {:.2}) to {}",
        ens.len(),
        a.modes,
        ens.ess(),
        a.out.display()
    );
    Ok(Outcome::Pass)
}

fn cmd_evolve(a: EvolveArgs) -> CliResult {
    let started = Instant::now();
    let u0 = project(&read_field_any(&a.input)?, a.modes);
    let mut cfg = FlowConfig::new(a.modes, a.dt, a.horizon, a.variant.into());
    if let Some(c) = a.coeff {
        cfg.nonlin_coeff = c;
    }
    cfg.output_stride = a.stride;
    let traj = evolve(&u0, &cfg)?;
    io::write_trajectory(&a.out, &traj)?;
    write_manifest(&a.out, "evolve", &a, started)?;
    println!(
        "evolved N = {} to t = {} ({} stored states) -> {}",
        a.modes,
        a.horizon,
        traj.len(),
        a.out.display()
    );
    Ok(Outcome::Pass)
}

fn cmd_gauge(a: GaugeArgs) -> CliResult {
    let started = Instant::now();
    let traj = io::read_trajectory(&a.input)?;
    let (out, record) = apply_gauge(&traj, a.direction.into())?;
    io::write_trajectory(&a.out, &out)?;
    if let Some(csv) = &a.alpha_out {
        io::atomic_write(csv, |w| {
            writeln!(w, "t,alpha")?;
            for (t, alpha) in out.times.iter().zip(&record.alpha) {
                writeln!(w, "{t},{alpha}")?;
            }
            Ok(())
        })?;
    }
    write_manifest(&a.out, "gauge", &a, started)?;
    println!("gauged trajectory -> {}", a.out.display());
    Ok(Outcome::Pass)
}

fn cmd_conserve(a: ConserveArgs) -> CliResult {
    let started = Instant::now();
    let traj = io::read_trajectory(&a.traj)?;
    let report = conservation_report(&traj);
    io::atomic_write(&a.out, |w| {
        writeln!(w, "t,l2,h")?;
        for i in 0..report.times.len() {
            writeln!(w, "{},{},{}", report.times[i], report.l2[i], report.h[i])?;
        }
        Ok(())
    })?;
    write_manifest(&a.out, "conserve", &a, started)?;
    println!(
        "relative drifts over [0, {}]: L2 {:.3e}, H {:.3e}",
        traj.times.last().copied().unwrap_or(0.0),
        report.l2_drift,
        report.h_drift
    );
    let mut failures = Vec::new();
    if let Some(tol) = a.max_l2_drift {
        if report.l2_drift > tol {
            failures.push(format!("L2 drift {:.3e} > {tol:.3e}", report.l2_drift));
        }
    }
    if let Some(tol) = a.max_h_drift {
        if report.h_drift > tol {
            failures.push(format!("H drift {:.3e} > {tol:.3e}", report.h_drift));
        }
    }
    if failures.is_empty() {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::Fail(failures.join("; ")))
    }
}

fn cmd_liouville(a: LiouvilleArgs) -> CliResult {
    let started = Instant::now();
    let u = sample_wiener(&WienerSpec::new(a.modes, a.seed, 0));
    let cfg = FlowConfig::new(a.modes, a.dt, a.time, Variant::Gauged);
    let div = vector_field_divergence(&u, &cfg)?;
    let det = jacobian_det(&u, a.time, &cfg)?;
    println!(
        "N = {}: divergence {:.3e}, |det J - 1| = {:.3e} at t = {}",
        a.modes,
        div,
        (det - 1.0).abs(),
        a.time
    );
    let manifest_target = output_root().join(format!("liouville-n{}", a.modes));
    write_manifest(&manifest_target, "liouville", &a, started)?;
    let mut failures = Vec::new();
    if div.abs() > a.div_tol {
        failures.push(format!("divergence {div:.3e} exceeds {:.1e}", a.div_tol));
    }
    if (det - 1.0).abs() > a.det_tol {
        failures.push(format!(
            "|det J - 1| = {:.3e} exceeds {:.1e}",
            (det - 1.0).abs(),
            a.det_tol
        ));
    }
    if failures.is_empty() {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::Fail(failures.join("; ")))
    }
}

fn cmd_invariance(a: InvarianceArgs) -> CliResult {
    let started = Instant::now();
    let ens = io::read_ensemble(&a.ensemble)?;
    let specs: Vec<&str> = if a.observables.is_empty() {
        vec!["cos(re(1))", "clamp(abs2(2), 10)", "sin(im(3))"]
    } else {
        a.observables.iter().map(String::as_str).collect()
    };
    let observables = specs
        .iter()
        .map(|s| Observable::parse(s))
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = FlowConfig::new(ens.max_mode, a.dt, a.horizon, Variant::Gauged);
    let report = invariance_test(&ens, &cfg, &observables, a.perturb)?;
    io::atomic_write(&a.out, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        w.write_all(b"\n")?;
        Ok(())
    })?;
    write_manifest(&a.out, "invariance", &a, started)?;
    println!(
        "{:<24} {:>12} {:>12} {:>8}",
        "observable", "mean(0)", "mean(T)", "z"
    );
    for s in &report.stats {
        println!(
            "{:<24} {:>12.6} {:>12.6} {:>8.2}",
            s.name, s.mean_t0, s.mean_t1, s.z
        );
    }
    println!("ESS {:.1} over {} samples", report.ess, report.count);
    let worst = report
        .stats
        .iter()
        .map(|s| s.z.abs())
        .fold(0.0f64, f64::max);
    if worst > a.z_max {
        Ok(Outcome::Fail(format!(
            "max |z| = {worst:.2} exceeds {:.1}",
            a.z_max
        )))
    } else {
        Ok(Outcome::Pass)
    }
}

fn cmd_smoothing(a: SmoothingArgs) -> CliResult {
    let started = Instant::now();
    let ens = io::read_ensemble(&a.ensemble)?;
    let max_n = a.modes_list.iter().copied().max().unwrap_or(0);
    let template = FlowConfig::new(max_n.max(1), a.dt, a.horizon, Variant::Gauged);
    let table = smoothing_diagnostic(&ens.samples, &a.modes_list, a.delta, a.horizon, &template)?;
    io::atomic_write(&a.out, |w| {
        writeln!(w, "modes,data_norm,duhamel_norm")?;
        for row in &table.rows {
            writeln!(w, "{},{},{}", row.max_mode, row.data_norm, row.duhamel_norm)?;
        }
        Ok(())
    })?;
    write_manifest(&a.out, "smoothing", &a, started)?;
    println!(
        "data slope {:?} (analytic {:?}), Duhamel slope {:?}",
        table.data_slope, table.analytic_data_slope, table.duhamel_slope
    );
    Ok(Outcome::Pass)
}

fn cmd_cauchy(a: CauchyArgs) -> CliResult {
    let started = Instant::now();
    let u0 = read_field_any(&a.input)?;
    let max_n = a.modes_list.iter().copied().max().unwrap_or(1);
    let template = FlowConfig::new(max_n, a.dt, a.horizon, Variant::Gauged);
    let report = cauchy_rate(&u0, &a.modes_list, a.s, a.horizon, &template)?;
    for (n, e) in report.ns.iter().zip(&report.errors) {
        println!("N = {n:>5}: max H^s gap {e:.6e}");
    }
    let manifest_target = output_root().join("cauchy");
    write_manifest(&manifest_target, "cauchy", &a, started)?;
    match report.slope {
        Some(slope) if slope < 0.0 => {
            println!("fitted decay exponent {slope:.3}");
            Ok(Outcome::Pass)
        }
        Some(slope) => Ok(Outcome::Fail(format!(
            "fitted decay exponent {slope:.3} is not negative"
        ))),
        None => {
            println!("differences at machine precision; no slope fitted");
            Ok(Outcome::Pass)
        }
    }
}

fn cmd_xsb(a: XsbArgs) -> CliResult {
    let started = Instant::now();
    let traj = io::read_trajectory(&a.traj)?;
    let spectrum = spacetime_spectrum(&traj, a.window.into())?;
    let value = xsb_norm(&spectrum, XsbSpec::new(a.s, a.b, a.kind.into()));
    println!("norm = {value:.9e}");
    let manifest_target = output_root().join("xsb");
    write_manifest(&manifest_target, "xsb", &a, started)?;
    Ok(Outcome::Pass)
}

fn cmd_resonance(cmd: ResonanceCmd) -> CliResult {
    match cmd {
        ResonanceCmd::VerifyZeta2 { max } => {
            let report = verify_zeta2_lower_bound(max)?;
            println!(
                "checked {} tuples up to |n| = {max}; min |Omega| / n_max^2 = {:.4}",
                report.tuples, report.min_ratio
            );
            if report.min_ratio >= 1.0 {
                Ok(Outcome::Pass)
            } else {
                Ok(Outcome::Fail(format!(
                    "min ratio {:.4} < 1 at witness {:?}",
                    report.min_ratio, report.witness
                )))
            }
        }
        ResonanceCmd::Count { lemma, sizes } => {
            let report = count_resonant_tuples(lemma.into(), &sizes)?;
            println!(
                "worst fiber count {} against bound {} at shells {:?}",
                report.count, report.bound, report.sizes
            );
            if report.holds() {
                Ok(Outcome::Pass)
            } else {
                Ok(Outcome::Fail(format!(
                    "count {} does not beat bound {}",
                    report.count, report.bound
                )))
            }
        }
        ResonanceCmd::Cancel { samples, seed } => {
            let report = cancellation_identity_check(samples, seed)?;
            println!(
                "max relative residual {:.3e} over {samples} samples ({} resampled)",
                report.max_relative_residual, report.resamples
            );
            if report.max_relative_residual <= 1e-12 {
                Ok(Outcome::Pass)
            } else {
                Ok(Outcome::Fail(format!(
                    "residual {:.3e} exceeds 1e-12",
                    report.max_relative_residual
                )))
            }
        }
        ResonanceCmd::Suite { max } => cmd_resonance_suite(max),
    }
}

fn cmd_resonance_suite(max: i64) -> CliResult {
    let mut failures = Vec::new();

    for n1 in -max..=max {
        for n2 in -max..=max {
            let n = n1 + n2;
            if n1 == 0 || n2 == 0 || n == 0 {
                continue;
            }
            let (lhs, rhs) = kdv_factorization_check(n, n1, n2)?;
            if lhs != rhs {
                failures.push(format!("KdV factorization fails at ({n}; {n1}, {n2})"));
            }
        }
    }
    println!("KdV factorization: exhaustive up to |n| = {max} ok");

    let zeta2 = verify_zeta2_lower_bound(max)?;
    println!(
        "zeta2 lower bound: min ratio {:.4} over {} tuples",
        zeta2.min_ratio, zeta2.tuples
    );
    if zeta2.min_ratio < 1.0 {
        failures.push(format!("zeta2 min ratio {:.4} < 1", zeta2.min_ratio));
    }

    let mut max_roots = 0;
    for n in -max..=max {
        for n3 in -max..=max {
            for n4 in -max..=max {
                if n == 0 || n3 == 0 || n4 == 0 || n - n3 - n4 == 0 {
                    continue;
                }
                for mu in -10..=10 {
                    let roots = quad_roots(n, n3, n4, mu)?;
                    max_roots = max_roots.max(roots.len());
                }
            }
        }
    }
    println!("quad_roots: at most {max_roots} roots over the sweep");
    if max_roots > 2 {
        failures.push(format!("quad_roots returned {max_roots} > 2 roots"));
    }

    let cancel = cancellation_identity_check(10_000, 2024)?;
    println!(
        "cancellation identity: max relative residual {:.3e}",
        cancel.max_relative_residual
    );
    if cancel.max_relative_residual > 1e-12 {
        failures.push(format!(
            "cancellation residual {:.3e} > 1e-12",
            cancel.max_relative_residual
        ));
    }

    if failures.is_empty() {
        Ok(Outcome::Pass)
    } else {
        Ok(Outcome::Fail(failures.join("; ")))
    }
}

fn cmd_report(a: ReportArgs) -> CliResult {
    if !a.dir.is_dir() {
        return Err(CliError::Usage(format!(
            "{} is not a directory",
            a.dir.display()
        )));
    }
    let mut manifests: Vec<PathBuf> = std::fs::read_dir(&a.dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".manifest.json"))
        })
        .collect();
    manifests.sort();
    if manifests.is_empty() {
        return Err(CliError::Usage(format!(
            "no manifests found in {}; refusing to summarize",
            a.dir.display()
        )));
    }
    for path in &manifests {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
        let command = value["command"].as_str().unwrap_or("?");
        let elapsed = value["elapsed_seconds"].as_f64().unwrap_or(f64::NAN);
        println!("== {} ({command}, {elapsed:.2}s)", path.display());
        summarize_artifact(path, command);
    }
    Ok(Outcome::Pass)
}

/// Print the headline numbers of the artifact belonging to a manifest.
fn summarize_artifact(manifest: &Path, command: &str) {
    let artifact = manifest
        .to_str()
        .and_then(|s| s.strip_suffix(".manifest.json"))
        .map(PathBuf::from);
    let Some(artifact) = artifact else { return };
    match command {
        "conserve" | "smoothing" => {
            if let Ok(text) = std::fs::read_to_string(&artifact) {
                for line in text.lines().take(1).chain(text.lines().skip(1).take(5)) {
                    println!("   {line}");
                }
                let n = text.lines().count();
                if n > 6 {
                    println!("   ... ({} rows)", n - 1);
                }
            }
        }
        "invariance" => {
            if let Ok(text) = std::fs::read_to_string(&artifact) {
                if let Ok(v) = serde_json::from_str::<serde_json::Value>(&text) {
                    println!(
                        "   ESS {} over {} samples",
                        v["ess"].as_f64().unwrap_or(f64::NAN),
                        v["count"].as_u64().unwrap_or(0)
                    );
                    if let Some(stats) = v["stats"].as_array() {
                        for s in stats {
                            println!(
                                "   {}: z = {:.2}",
                                s["name"].as_str().unwrap_or("?"),
                                s["z"].as_f64().unwrap_or(f64::NAN)
                            );
                        }
                    }
                }
            }
        }
        "sample" | "evolve" | "gauge" if artifact.exists() => {
            println!("   artifact {} present", artifact.display());
        }
        _ => {}
    }
}

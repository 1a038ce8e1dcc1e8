//! Scenario-driven front end for the `fracblow` engines.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | success (certified, clean simulation, ODE containment, audit written) |
//! | 2  | I/O failure or invalid scenario |
//! | 4  | engine error |
//! | 10 | certify: hypotheses fail |
//! | 11 | certify: `F(0) ≤ 0` |
//! | 20 | simulate: solver divergence |
//! | 21 | ode: detected time outside the window |
//!
//! With several scenarios the process exits with the first non-zero code in
//! scenario order.

mod scenario;

pub use scenario::{parse_scenario, BcSpec, EndSpec, GridSpec, Mode, OdeSpec, Scenario};

use fracblow::blowup_ode::{solve_comparison_ode, tstar_window, DetectionReason, OdeConfig, TstarWindow};
use fracblow::capacity::{
    audit_reference_examples, build_certificate_with, CapacityCertificate, CertificateStatus,
};
use fracblow::pde_sim::{
    check_max_principle, detect_blowup, monitor_capacity, monitor_gradient, simulate_burgers,
    simulate_fbb, write_run_csv, BlowupReason, BlowupReport, MaxPrincipleReport, SimConfig,
    Termination,
};
use fracblow::quadrature::QuadOptions;
use fracblow::testfn::FamilySpec;
use serde::Serialize;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 2;
pub const EXIT_ENGINE: i32 = 4;
pub const EXIT_HYPOTHESES_FAIL: i32 = 10;
pub const EXIT_F0_NONPOSITIVE: i32 = 11;
pub const EXIT_SOLVER_DIVERGENCE: i32 = 20;
pub const EXIT_ODE_OUTSIDE_WINDOW: i32 = 21;

/// ODE detections must fall in `[0.95 · lower, 1.05 · upper]`.
pub const ODE_WINDOW_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Io(String),
    Scenario(String),
    Engine(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Scenario(_) => EXIT_IO,
            CliError::Engine(_) => EXIT_ENGINE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Scenario(m) => write!(f, "invalid scenario: {m}"),
            CliError::Engine(m) => write!(f, "engine error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn engine(e: fracblow::Error) -> CliError {
    CliError::Engine(e.to_string())
}

/// Settings shared by every scenario in one invocation.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    /// Relative quadrature tolerance for θ and `F(0)`.
    pub tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            out: PathBuf::from("out"),
            tol: QuadOptions::default().rel_tol,
        }
    }
}

impl RunOptions {
    fn quad(&self) -> Result<QuadOptions, CliError> {
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return Err(CliError::Scenario(format!("--tol must lie in (0, 1), got {}", self.tol)));
        }
        Ok(QuadOptions { rel_tol: self.tol, ..QuadOptions::default() })
    }
}

/// Result of one scenario: exit code, a one-line summary and written files.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: String,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    scenario: &'a str,
    report: T,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    schema_version: u32,
    generated_at_unix: u64,
    tool_version: &'a str,
    command: &'a str,
}

fn write_json<T: Serialize>(path: &Path, kind: &str, scenario: &str, report: T) -> Result<(), CliError> {
    let env = Envelope { schema_version: SCHEMA_VERSION, kind, scenario, report };
    let mut text = serde_json::to_string_pretty(&env).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Timestamps live beside the report so the report itself is reproducible.
fn write_sidecar(out: &Path, stem: &str, command: &str) -> Result<PathBuf, CliError> {
    let path = out.join(format!("{stem}.meta.json"));
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let meta = Sidecar {
        schema_version: SCHEMA_VERSION,
        generated_at_unix: secs,
        tool_version: env!("CARGO_PKG_VERSION"),
        command,
    };
    let text = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn ensure_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_scenario(&text, base).map_err(|e| match e {
        CliError::Scenario(m) => CliError::Scenario(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Runs one scenario in the given mode and writes its artifacts.
pub fn run(scenario: &Scenario, mode: Mode, opts: &RunOptions) -> Result<Outcome, CliError> {
    scenario.require(mode)?;
    ensure_dir(&opts.out)?;
    let outcome = match mode {
        Mode::Certify => run_certify(scenario, opts),
        Mode::Simulate => run_simulate(scenario, opts),
        Mode::Ode => run_ode(scenario, opts),
        Mode::Audit => run_audit(&opts.out),
    }?;
    let mut outcome = outcome;
    let stem = if mode == Mode::Audit { "audit" } else { scenario.output_stem.as_str() };
    outcome.artifacts.push(write_sidecar(&opts.out, stem, mode.as_str())?);
    Ok(outcome)
}

/// The audit needs no scenario.
pub fn run_audit_only(opts: &RunOptions) -> Result<Outcome, CliError> {
    ensure_dir(&opts.out)?;
    let mut outcome = run_audit(&opts.out)?;
    outcome.artifacts.push(write_sidecar(&opts.out, "audit", "audit")?);
    Ok(outcome)
}

fn certificate(s: &Scenario, opts: &RunOptions) -> Result<CapacityCertificate, CliError> {
    let (Some(family), Some(phi), Some(u0)) = (s.family, s.phi.as_ref(), s.u0.as_ref()) else {
        return Err(CliError::Scenario("certificate needs family, phi and u0".into()));
    };
    Ok(build_certificate_with(phi, &family, u0, &s.boundary_functional, s.alpha, &opts.quad()?))
}

fn run_certify(s: &Scenario, opts: &RunOptions) -> Result<Outcome, CliError> {
    let cert = certificate(s, opts)?;
    let path = opts.out.join(format!("{}.certificate.json", s.output_stem));
    write_json(&path, "certificate", &s.name, &cert)?;
    let (exit_code, status) = match cert.status {
        CertificateStatus::CertifiedBlowup => (EXIT_OK, "certified-blowup"),
        CertificateStatus::HypothesesFail => (EXIT_HYPOTHESES_FAIL, "hypotheses-fail"),
        CertificateStatus::F0Nonpositive => (EXIT_F0_NONPOSITIVE, "F0-nonpositive"),
    };
    let window = cert
        .window
        .map(|w| format!(", T* in [{:.6}, {:.6}]", w.lower, w.upper))
        .unwrap_or_default();
    Ok(Outcome {
        exit_code,
        summary: format!("{status}{window}"),
        artifacts: vec![path],
    })
}

#[derive(Serialize)]
struct SimulateReport<'a> {
    family: FamilySpec,
    alpha: f64,
    grid: fracblow::pde_sim::SpatialGrid,
    config: SimConfig,
    termination: &'a Termination,
    steps: usize,
    certificate_status: Option<CertificateStatus>,
    gradient_m_valid: Option<bool>,
    max_principle: Option<MaxPrincipleReport>,
    blowup: BlowupReport,
}

fn run_simulate(s: &Scenario, opts: &RunOptions) -> Result<Outcome, CliError> {
    let family = s.family.expect("checked by require");
    let u0 = s.u0.as_ref().expect("checked by require");
    let spec = s.grid.expect("checked by require");
    let grid = s.spatial_grid()?;
    let bc = s.boundary_set()?;

    let cert = match s.phi {
        Some(_) => Some(certificate(s, opts)?),
        None => None,
    };
    let horizon = match (spec.horizon, cert.as_ref().and_then(|c| c.window)) {
        (Some(h), _) => h,
        (None, Some(w)) => 1.2 * w.upper,
        (None, None) => {
            return Err(CliError::Scenario(
                "grid.horizon: required unless a certified window supplies it".into(),
            ))
        }
    };
    let mut cfg = if spec.adaptive {
        SimConfig::adaptive(spec.dt, horizon)
    } else {
        SimConfig::fixed(spec.dt, horizon)
    };
    if let Some(b) = spec.memory_budget {
        cfg.memory_budget = b;
    }

    let (field, f, m_valid, mp) = match family {
        FamilySpec::Fbb { .. } => {
            let field = simulate_fbb(&family, s.alpha, u0, &bc, &grid, &cfg).map_err(engine)?;
            let f = match &s.phi {
                Some(phi) => Some(monitor_capacity(&field, phi, &family).map_err(engine)?),
                None => None,
            };
            (field, f, None, None)
        }
        FamilySpec::BurgersGrad { nu, m_bound } => {
            let field = simulate_burgers(nu, s.alpha, u0, &bc, &grid, &cfg).map_err(engine)?;
            let phi = s.phi.as_ref().expect("checked by require");
            let g = monitor_gradient(&field, nu, phi, m_bound).map_err(engine)?;
            let mp = check_max_principle(&field);
            (field, Some(g.f), Some(g.m_valid), Some(mp))
        }
        _ => unreachable!("rejected by require"),
    };
    let report = detect_blowup(&field, f.as_deref(), cert.as_ref());

    let csv_path = opts.out.join(format!("{}.run.csv", s.output_stem));
    let file = File::create(&csv_path).map_err(|e| CliError::Io(format!("{}: {e}", csv_path.display())))?;
    write_run_csv(BufWriter::new(file), &field, f.as_deref()).map_err(|e| CliError::Io(e.to_string()))?;

    let exit_code = if report.reason == BlowupReason::SolverDivergence {
        EXIT_SOLVER_DIVERGENCE
    } else {
        EXIT_OK
    };
    let summary = match report.t_detect {
        Some(t) if report.detected => format!("blow-up detected at t = {t:.6} ({:?})", report.reason),
        _ => format!("no blow-up up to t = {:.6}", field.times.last()),
    };
    let json_path = opts.out.join(format!("{}.blowup.json", s.output_stem));
    let body = SimulateReport {
        family,
        alpha: s.alpha.value(),
        grid,
        config: cfg,
        termination: &field.termination,
        steps: field.times.len() - 1,
        certificate_status: cert.as_ref().map(|c| c.status),
        gradient_m_valid: m_valid,
        max_principle: mp,
        blowup: report,
    };
    write_json(&json_path, "simulation", &s.name, body)?;
    Ok(Outcome { exit_code, summary, artifacts: vec![csv_path, json_path] })
}

#[derive(Serialize)]
struct OdeReport {
    window: TstarWindow,
    threshold: f64,
    dt0: f64,
    horizon: f64,
    steps: usize,
    detected_tstar: Option<f64>,
    detection_reason: DetectionReason,
    window_slack: f64,
    containment: bool,
}

fn run_ode(s: &Scenario, opts: &RunOptions) -> Result<Outcome, CliError> {
    let o = s.ode.expect("checked by require");
    let mut cfg = OdeConfig::with_defaults(s.alpha, o.u0).map_err(engine)?;
    if let Some(t) = o.threshold {
        cfg.threshold = t;
    }
    if let Some(d) = o.dt0 {
        cfg.dt0 = d;
    }
    if let Some(h) = o.horizon {
        cfg.horizon = h;
    }
    if let Some(n) = o.max_steps {
        cfg.max_steps = n;
    }
    let window = tstar_window(s.alpha, o.u0).map_err(engine)?;
    let traj = solve_comparison_ode(&cfg).map_err(engine)?;
    let containment = traj.detected_tstar.is_some_and(|t| {
        t >= (1.0 - ODE_WINDOW_SLACK) * window.lower && t <= (1.0 + ODE_WINDOW_SLACK) * window.upper
    });

    let csv_path = opts.out.join(format!("{}.trajectory.csv", s.output_stem));
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", csv_path.display()));
    let mut w = csv::Writer::from_path(&csv_path).map_err(io)?;
    w.write_record(["t", "u"]).map_err(io)?;
    for (t, u) in traj.history.grid().nodes().iter().zip(traj.history.samples()) {
        w.write_record([t.to_string(), u.to_string()]).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;

    let json_path = opts.out.join(format!("{}.window.json", s.output_stem));
    let report = OdeReport {
        window,
        threshold: cfg.threshold,
        dt0: cfg.dt0,
        horizon: cfg.horizon,
        steps: traj.history.len() - 1,
        detected_tstar: traj.detected_tstar,
        detection_reason: traj.detection_reason,
        window_slack: ODE_WINDOW_SLACK,
        containment,
    };
    write_json(&json_path, "ode", &s.name, &report)?;
    let summary = match traj.detected_tstar {
        Some(t) => format!(
            "t* = {t:.6} vs window [{:.6}, {:.6}]{}",
            window.lower,
            window.upper,
            if containment { "" } else { " (outside)" }
        ),
        None => format!("no escape before t = {:.6}", cfg.horizon),
    };
    Ok(Outcome {
        exit_code: if containment { EXIT_OK } else { EXIT_ODE_OUTSIDE_WINDOW },
        summary,
        artifacts: vec![csv_path, json_path],
    })
}

fn run_audit(out: &Path) -> Result<Outcome, CliError> {
    let rows = audit_reference_examples();
    let json_path = out.join("audit.json");
    write_json(&json_path, "audit", "reference-examples", &rows)?;

    let csv_path = out.join("audit.csv");
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", csv_path.display()));
    let mut w = csv::Writer::from_path(&csv_path).map_err(io)?;
    w.write_record([
        "id",
        "stated_theta1",
        "computed_theta1",
        "stated_theta2",
        "computed_theta2",
        "theta1_match",
        "theta2_match",
        "condition_match",
        "condition_satisfiable",
        "flagged",
    ])
    .map_err(io)?;
    for r in &rows {
        w.write_record([
            r.id.to_string(),
            r.stated_theta1.to_string(),
            r.computed_theta1.to_string(),
            r.stated_theta2.to_string(),
            r.computed_theta2.to_string(),
            r.theta1_match.to_string(),
            r.theta2_match.to_string(),
            r.condition_match.to_string(),
            r.condition_satisfiable.to_string(),
            r.flagged.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;

    let flagged: Vec<&str> = rows.iter().filter(|r| r.flagged).map(|r| r.id).collect();
    Ok(Outcome {
        exit_code: EXIT_OK,
        summary: format!("{} examples, flagged: {}", rows.len(), flagged.join(", ")),
        artifacts: vec![json_path, csv_path],
    })
}

/// First non-zero code in order, or zero.
pub fn combine_exit_codes(codes: impl IntoIterator<Item = i32>) -> i32 {
    codes.into_iter().find(|&c| c != 0).unwrap_or(EXIT_OK)
}

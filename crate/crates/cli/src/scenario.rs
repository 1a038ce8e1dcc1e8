//! Scenario documents.
//!
//! A scenario is a JSON object. Test functions and closed-form initial data
//! are expression strings over `x`:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := number | 'x' | 'exp' '(' expr ')' | factor '^' int | '(' expr ')'
//! ```
//!
//! A leading `-` negates a term. Sampled initial data is read from a file
//! with one value per line, taken as a uniform grid covering `[0, L]`.

use crate::CliError;
use fracblow::capacity::{BoundaryFunctional, InitialData};
use fracblow::fracops::FractionalOrder;
use fracblow::pde_sim::{flux_neutral_robin, BoundarySet, EndCondition, Grading, SpatialGrid};
use fracblow::testfn::{FamilySpec, TestFunction};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Certify,
    Simulate,
    Ode,
    Audit,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Certify => "certify",
            Mode::Simulate => "simulate",
            Mode::Ode => "ode",
            Mode::Audit => "audit",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawU0 {
    Expr(String),
    Samples { samples: PathBuf },
}

/// An end condition as written in a scenario; `flux-neutral` is resolved
/// against `φ` once the test function is known.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EndSpec {
    Dirichlet {
        value: f64,
        #[serde(default)]
        slope: Option<f64>,
        #[serde(default)]
        curvature: Option<f64>,
    },
    Neumann {
        value: f64,
    },
    Robin {
        g: f64,
        k1: f64,
        k2: f64,
    },
    FluxNeutral,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcSpec {
    pub left: EndSpec,
    pub right: EndSpec,
}

impl Default for BcSpec {
    fn default() -> Self {
        let zero = EndSpec::Dirichlet { value: 0.0, slope: None, curvature: None };
        Self { left: zero, right: zero }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub m: usize,
    pub dt: f64,
    /// Defaults to `1.2 ×` the certificate's upper window when one exists.
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub adaptive: bool,
    #[serde(default)]
    pub grading: Option<Grading>,
    #[serde(default)]
    pub memory_budget: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSpec {
    pub u0: f64,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub dt0: Option<f64>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    mode: Option<Mode>,
    #[serde(default)]
    family: Option<FamilySpec>,
    alpha: f64,
    #[serde(default = "unit_length")]
    length: f64,
    #[serde(default)]
    phi: Option<String>,
    #[serde(default)]
    u0: Option<RawU0>,
    #[serde(default)]
    boundary_functional: Option<BoundaryFunctional>,
    #[serde(default)]
    bc: Option<BcSpec>,
    #[serde(default)]
    grid: Option<GridSpec>,
    #[serde(default)]
    ode: Option<OdeSpec>,
    #[serde(default)]
    output_stem: Option<String>,
}

fn unit_length() -> f64 {
    1.0
}

/// A parsed and range-checked scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub mode: Option<Mode>,
    pub family: Option<FamilySpec>,
    pub alpha: FractionalOrder,
    pub length: f64,
    pub phi: Option<TestFunction>,
    pub u0: Option<InitialData>,
    pub boundary_functional: BoundaryFunctional,
    pub bc: BcSpec,
    pub grid: Option<GridSpec>,
    pub ode: Option<OdeSpec>,
    pub output_stem: String,
}

fn invalid(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Scenario(format!("{field}: {msg}"))
}

/// Parses a scenario; `base` resolves relative sample paths.
pub fn parse_scenario(text: &str, base: &Path) -> Result<Scenario, CliError> {
    let raw: RawScenario = serde_json::from_str(text).map_err(|e| {
        CliError::Scenario(format!(
            "parse error at line {} column {}: {e}",
            e.line(),
            e.column()
        ))
    })?;

    if raw.name.trim().is_empty() {
        return Err(invalid("name", "must not be empty"));
    }
    let alpha = FractionalOrder::new(raw.alpha)
        .map_err(|_| invalid("alpha", format!("alpha out of range (0, 1]: {}", raw.alpha)))?;
    if !(raw.length > 0.0 && raw.length.is_finite()) {
        return Err(invalid("length", format!("must be positive, got {}", raw.length)));
    }
    if let Some(f) = &raw.family {
        f.validate().map_err(|e| invalid("family", e))?;
    }
    let phi = raw
        .phi
        .as_deref()
        .map(|s| TestFunction::parse(s, raw.length))
        .transpose()
        .map_err(|e| invalid("phi", e))?;
    let u0 = match raw.u0 {
        None => None,
        Some(RawU0::Expr(s)) => Some(InitialData::parse(&s).map_err(|e| invalid("u0", e))?),
        Some(RawU0::Samples { samples }) => Some(read_samples(&base.join(samples), raw.length)?),
    };
    if let Some(g) = &raw.grid {
        if g.m < 8 {
            return Err(invalid("grid.m", format!("need m >= 8, got {}", g.m)));
        }
        if !(g.dt > 0.0 && g.dt.is_finite()) {
            return Err(invalid("grid.dt", format!("must be positive, got {}", g.dt)));
        }
        if let Some(h) = g.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(invalid("grid.horizon", format!("must be positive, got {h}")));
            }
        }
        if let Some(gr) = g.grading {
            SpatialGrid::graded(raw.length, g.m, gr.toward, gr.ratio)
                .map_err(|e| invalid("grid.grading", e))?;
        }
    }
    if let Some(o) = &raw.ode {
        if !(o.u0 > 0.0 && o.u0.is_finite()) {
            return Err(invalid("ode.u0", format!("must be positive, got {}", o.u0)));
        }
    }
    let output_stem = raw.output_stem.unwrap_or_else(|| sanitize(&raw.name));
    if output_stem.is_empty() || output_stem.contains(['/', '\\']) {
        return Err(invalid("output_stem", "must be a plain file name"));
    }

    Ok(Scenario {
        name: raw.name,
        mode: raw.mode,
        family: raw.family,
        alpha,
        length: raw.length,
        phi,
        u0,
        boundary_functional: raw.boundary_functional.unwrap_or(BoundaryFunctional::Zero),
        bc: raw.bc.unwrap_or_default(),
        grid: raw.grid,
        ode: raw.ode,
        output_stem,
    })
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

fn read_samples(path: &Path, length: f64) -> Result<InitialData, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let field = rec.get(0).unwrap_or("").trim();
        let v: f64 = field
            .parse()
            .map_err(|_| invalid("u0.samples", format!("not a number: {field:?}")))?;
        values.push(v);
    }
    InitialData::sampled(length, values).map_err(|e| invalid("u0.samples", e))
}

impl Scenario {
    /// Checks the fields the given mode needs.
    pub fn require(&self, mode: Mode) -> Result<(), CliError> {
        if let Some(m) = self.mode {
            if m != mode {
                return Err(invalid(
                    "mode",
                    format!("scenario is for `{}`, not `{}`", m.as_str(), mode.as_str()),
                ));
            }
        }
        match mode {
            Mode::Certify => {
                self.family.ok_or_else(|| invalid("family", "required in certify mode"))?;
                self.phi.as_ref().ok_or_else(|| invalid("phi", "required in certify mode"))?;
                self.u0.as_ref().ok_or_else(|| invalid("u0", "required in certify mode"))?;
            }
            Mode::Simulate => {
                match self.family {
                    Some(FamilySpec::Fbb { .. }) => {}
                    Some(FamilySpec::BurgersGrad { .. }) => {
                        if self.phi.is_none() {
                            return Err(invalid("phi", "required for the gradient monitor"));
                        }
                    }
                    Some(f) => {
                        return Err(invalid("family", format!("{} cannot be simulated", f.name())))
                    }
                    None => return Err(invalid("family", "required in simulate mode")),
                }
                self.u0.as_ref().ok_or_else(|| invalid("u0", "required in simulate mode"))?;
                self.grid.ok_or_else(|| invalid("grid", "required in simulate mode"))?;
            }
            Mode::Ode => {
                self.ode.ok_or_else(|| invalid("ode", "required in ode mode"))?;
            }
            Mode::Audit => {}
        }
        Ok(())
    }

    pub fn spatial_grid(&self) -> Result<SpatialGrid, CliError> {
        let g = self.grid.ok_or_else(|| invalid("grid", "missing"))?;
        match g.grading {
            Some(gr) => SpatialGrid::graded(self.length, g.m, gr.toward, gr.ratio),
            None => SpatialGrid::new(self.length, g.m),
        }
        .map_err(|e| invalid("grid", e))
    }

    /// Resolves flux-neutral ends against `φ` and the diffusion coefficient.
    pub fn boundary_set(&self) -> Result<BoundarySet, CliError> {
        let d = match self.family {
            Some(FamilySpec::Fbb { d, .. }) => Some(d),
            _ => None,
        };
        let resolve = |e: EndSpec, right: bool| -> Result<EndCondition, CliError> {
            Ok(match e {
                EndSpec::Dirichlet { value, slope, curvature } => {
                    EndCondition::Dirichlet { value, slope, curvature }
                }
                EndSpec::Neumann { value } => EndCondition::Neumann { value },
                EndSpec::Robin { g, k1, k2 } => EndCondition::Robin { g, k1, k2 },
                EndSpec::FluxNeutral => {
                    let d = d.ok_or_else(|| invalid("bc", "flux-neutral ends need an FBB family"))?;
                    let phi = self
                        .phi
                        .as_ref()
                        .ok_or_else(|| invalid("bc", "flux-neutral end needs phi"))?;
                    flux_neutral_robin(phi, d, right).map_err(|e| invalid("bc", e))?
                }
            })
        };
        Ok(BoundarySet {
            left: resolve(self.bc.left, false)?,
            right: resolve(self.bc.right, true)?,
        })
    }
}

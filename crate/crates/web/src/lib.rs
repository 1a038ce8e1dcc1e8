//! Browser bindings. Each export takes plain values and returns a JSON
//! string; the `*_json` functions hold the logic so native tests can call
//! them without a JS host.

use fracblow::blowup_ode::{solve_comparison_ode, tstar_window, OdeConfig};
use fracblow::capacity::{audit_reference_examples, build_certificate, BoundaryFunctional, InitialData};
use fracblow::fracops::FractionalOrder;
use fracblow::testfn::{FamilySpec, TestFunction};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Points kept when thinning the ODE trajectory for plotting.
const PLOT_POINTS: usize = 400;

fn order(alpha: f64) -> Result<FractionalOrder, String> {
    FractionalOrder::new(alpha).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// `family` is the tagged JSON form, e.g. `{"family":"fbb","a":0,"b":1,"c":0,"d":0}`.
pub fn certify_json(
    family: &str,
    phi: &str,
    length: f64,
    u0: &str,
    alpha: f64,
    phi_lower_bound: f64,
) -> Result<String, String> {
    let spec: FamilySpec = serde_json::from_str(family).map_err(|e| format!("family: {e}"))?;
    let phi = TestFunction::parse(phi, length).map_err(|e| format!("phi: {e}"))?;
    let u0 = InitialData::parse(u0).map_err(|e| format!("u0: {e}"))?;
    let boundary = if phi_lower_bound == 0.0 {
        BoundaryFunctional::Zero
    } else {
        BoundaryFunctional::Constant { value: phi_lower_bound }
    };
    to_json(&build_certificate(&phi, &spec, &u0, &boundary, order(alpha)?))
}

#[derive(Serialize)]
struct OdeView {
    lower: f64,
    upper: f64,
    detected_tstar: Option<f64>,
    t: Vec<f64>,
    u: Vec<f64>,
}

pub fn ode_json(alpha: f64, u0: f64) -> Result<String, String> {
    let alpha = order(alpha)?;
    let w = tstar_window(alpha, u0).map_err(|e| e.to_string())?;
    let cfg = OdeConfig::with_defaults(alpha, u0).map_err(|e| e.to_string())?;
    let traj = solve_comparison_ode(&cfg).map_err(|e| e.to_string())?;
    let t = traj.history.grid().nodes();
    let u = traj.history.samples();
    let stride = t.len().div_ceil(PLOT_POINTS).max(1);
    let mut keep: Vec<usize> = (0..t.len()).step_by(stride).collect();
    if keep.last() != Some(&(t.len() - 1)) {
        keep.push(t.len() - 1);
    }
    to_json(&OdeView {
        lower: w.lower,
        upper: w.upper,
        detected_tstar: traj.detected_tstar,
        t: keep.iter().map(|&i| t[i]).collect(),
        u: keep.iter().map(|&i| u[i]).collect(),
    })
}

pub fn audit_json() -> Result<String, String> {
    to_json(&audit_reference_examples())
}

#[wasm_bindgen]
pub fn certify(family: &str, phi: &str, length: f64, u0: &str, alpha: f64, phi_lower_bound: f64) -> Result<String, JsValue> {
    certify_json(family, phi, length, u0, alpha, phi_lower_bound).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn comparison_ode(alpha: f64, u0: f64) -> Result<String, JsValue> {
    ode_json(alpha, u0).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn audit() -> Result<String, JsValue> {
    audit_json().map_err(|e| JsValue::from_str(&e))
}

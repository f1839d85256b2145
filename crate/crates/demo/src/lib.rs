//! wasm-bindgen entry points for the static page in `www/`.
//!
//! Every call returns a JSON string; errors surface as JS exceptions. The
//! `*_json` functions are the same operations for native callers.

use gibbsbox::estimate::{mple_estimate, takacs_fiksel_estimate, OptimizerConfig, TestFunction};
use gibbsbox::experiment::phase_arms;
use gibbsbox::io::{pattern, svg};
use gibbsbox::sampler::{Chain, SamplerConfig, Schedule};
use gibbsbox::{BoundaryCondition, EnergyModel, PointConfiguration, Window};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest window side the page accepts; keeps a call under a few seconds.
const MAX_SIDE: f64 = 40.0;
const MAX_SWEEPS: u32 = 2000;

fn model_for(family: &str, radius: f64) -> Result<EnergyModel, String> {
    let m = match family {
        "strauss" => EnergyModel::strauss(radius),
        "hard_core" => EnergyModel::hard_core(radius),
        "smooth_core" => EnergyModel::smooth_core(radius),
        "area" => EnergyModel::area(radius),
        "random_cluster" => EnergyModel::random_cluster(radius),
        other => return Err(format!("unknown family `{other}`")),
    };
    m.map_err(|e| e.to_string())
}

fn window_for(side: f64) -> Result<Window, String> {
    if !(side > 0.0 && side <= MAX_SIDE) {
        return Err(format!("side must lie in (0, {MAX_SIDE}]"));
    }
    Window::square(side).map_err(|e| e.to_string())
}

fn check_sweeps(sweeps: u32) -> Result<usize, String> {
    if sweeps == 0 || sweeps > MAX_SWEEPS {
        return Err(format!("sweeps must lie in 1..={MAX_SWEEPS}"));
    }
    Ok(sweeps as usize)
}

fn ball_radius(model: &EnergyModel) -> Option<f64> {
    match model {
        EnergyModel::Area { radius, .. } => Some(*radius),
        EnergyModel::RandomCluster { radius, .. } => Some(0.5 * radius),
        _ => None,
    }
}

fn run_chain(
    model: &EnergyModel,
    window: &Window,
    bc: &BoundaryCondition,
    z: f64,
    beta: f64,
    sweeps: usize,
    seed: u64,
) -> Result<(PointConfiguration, Value), String> {
    let sc = SamplerConfig::new(z, beta, seed).with_schedule(Schedule::new(sweeps, 1, 1));
    let mut chain = Chain::new(model, window, &sc, bc, 0).map_err(|e| e.to_string())?;
    let config = chain.sample(&sc.schedule).pop().expect("one retained state");
    let st = chain.state();
    let stats = json!({
        "count": config.len(),
        "energy": st.energy,
        "acceptance": st.acceptance_rates(),
        "proposals": st.steps,
    });
    Ok((config, stats))
}

/// Chain of `sweeps` sweeps from the empty pattern on `[0, side]²`.
pub fn simulate_json(family: &str, z: f64, beta: f64, radius: f64, side: f64, sweeps: u32, seed: u32) -> Result<String, String> {
    let model = model_for(family, radius)?;
    let window = window_for(side)?;
    let (config, mut stats) = run_chain(
        &model,
        &window,
        &BoundaryCondition::Free,
        z,
        beta,
        check_sweeps(sweeps)?,
        u64::from(seed),
    )?;
    stats["svg"] = svg::render_svg(&config, &window, ball_radius(&model)).into();
    stats["csv"] = pattern::write_csv(&config).into();
    Ok(stats.to_string())
}

/// Area model at `β = z` under the two boundary conditions of the phase
/// transition, with intensities on the central quarter.
pub fn phase_pair_json(z: f64, side: f64, sweeps: u32, seed: u32) -> Result<String, String> {
    let window = window_for(side)?;
    let sweeps = check_sweeps(sweeps)?;
    let centre = window.central(0.5).map_err(|e| e.to_string())?;
    let arms = phase_arms(1.0, &window).map_err(|e| e.to_string())?;
    let mut out = serde_json::Map::new();
    for (name, (model, bc), stream) in [("p", &arms[0], 0u64), ("q", &arms[1], 1)] {
        let seed = (u64::from(seed) << 1) | stream;
        let (config, mut stats) = run_chain(model, &window, bc, z, z, sweeps, seed)?;
        let inside = config.points_in(&centre).count() as f64;
        stats["intensity"] = (inside / centre.area()).into();
        stats["svg"] = svg::render_svg(&config, &window, Some(1.0)).into();
        out.insert(name.into(), stats);
    }
    Ok(Value::Object(out).to_string())
}

/// Takacs-Fiksel (`1, h, neighbor count`) and pseudo-likelihood fits of a
/// Strauss model to a CSV pattern on `[0, side]²`.
pub fn fit_strauss_json(csv: &str, side: f64, radius: f64) -> Result<String, String> {
    let window = window_for(side)?;
    let model = EnergyModel::strauss(radius).map_err(|e| e.to_string())?;
    let points = pattern::parse_csv(csv).map_err(|e| e.to_string())?;
    let config = PointConfiguration::from_points(window, radius, points).map_err(|e| e.to_string())?;
    let oc = OptimizerConfig::default();
    let fs = [
        TestFunction::ConstantOne,
        TestFunction::LocalEnergy,
        TestFunction::NeighborCount { radius: 1.5 * radius },
    ];
    let tf = takacs_fiksel_estimate(&fs, &model, &config, &oc, true).map_err(|e| e.to_string())?;
    let mple = mple_estimate(&model, &config, &oc, true).map_err(|e| e.to_string())?;
    Ok(json!({"points": config.len(), "tf": tf, "mple": mple}).to_string())
}

#[wasm_bindgen]
pub fn simulate(family: &str, z: f64, beta: f64, radius: f64, side: f64, sweeps: u32, seed: u32) -> Result<String, JsError> {
    simulate_json(family, z, beta, radius, side, sweeps, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn phase_pair(z: f64, side: f64, sweeps: u32, seed: u32) -> Result<String, JsError> {
    phase_pair_json(z, side, sweeps, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn fit_strauss(csv: &str, side: f64, radius: f64) -> Result<String, JsError> {
    fit_strauss_json(csv, side, radius).map_err(|e| JsError::new(&e))
}

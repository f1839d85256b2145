use crate::energy::{self, EnergyModel};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryCondition, PointConfiguration};

use super::contrast::{eroded, ContrastTerms, TestFunction};
use super::EstimationResult;

/// `β̂ = Σ Δₓh(x, γ∖x) / Σ |∇ₓh(x, γ∖x)|²` over the points of the window
/// (eroded by the model range when `border_correct`), i.e. the variational
/// GNZ identity with test function `∇ₓh`.
pub fn variational_beta(model: &EnergyModel, pattern: &PointConfiguration, border_correct: bool) -> Result<f64> {
    let window = eroded(pattern.window(), model.range(), border_correct)?;
    let bc = BoundaryCondition::Free;
    let (mut num, mut den) = (0.0, 0.0);
    let mut count = 0usize;
    for (i, x) in pattern.points_in(&window) {
        num += energy::laplacian_impl(model, x, pattern, &bc, Some(i))?;
        let g = energy::gradient_impl(model, x, pattern, &bc, Some(i))?;
        den += g.x * g.x + g.y * g.y;
        count += 1;
    }
    // `φ′ ≤ 2/R` for the smooth core, so terms scale like `1/range²`
    let scale = count.max(1) as f64 / (model.range() * model.range());
    if den.abs() < 1e-9 * scale {
        return Err(Error::DegenerateData(
            "no interacting pairs: the gradient of the local energy vanishes at every point".into(),
        ));
    }
    Ok(num / den)
}

/// Variational `β̂` completed by the activity solving the `f ≡ 1` GNZ
/// equation at `β̂`: `ẑ = N(γ_W) / ∫_W e^{−β̂h}`.
pub fn variational_estimate(
    model: &EnergyModel,
    pattern: &PointConfiguration,
    border_correct: bool,
    quadrature_nodes: Option<usize>,
) -> Result<EstimationResult> {
    let beta = variational_beta(model, pattern, border_correct)?;
    let terms = ContrastTerms::build(model, &[TestFunction::ConstantOne], pattern, border_correct, quadrature_nodes)?;
    let integral = terms.integrals(beta)[0];
    let z = terms.sums[0] / integral;
    Ok(EstimationResult {
        method: "variational".into(),
        z_hat: z,
        beta_hat: beta,
        contrast: 0.0,
        iterations: 0,
        border_corrected: border_correct,
        window: terms.window,
        on_boundary: false,
        standard_errors: None,
        warnings: Vec::new(),
        diagnostics: serde_json::Map::new(),
    })
}

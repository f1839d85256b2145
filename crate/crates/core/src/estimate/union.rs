use crate::energy::EnergyModel;
use crate::error::Result;
use crate::germ_grain::{germ_grain_summary, GermGrainSummary};
use crate::geometry::{PointConfiguration, Window};

use super::contrast::{eroded, ContrastTerms, TestFunction};
use super::optim::{minimize, OptimizerConfig};
use super::EstimationResult;

/// Takacs–Fiksel fit of the area model from the germ-grain set alone.
///
/// The pattern sums are the observed boundary length and isolated-ball
/// count over `window`; the integral terms integrate the exposed arc, the
/// isolation indicator and the added area of a candidate ball against the
/// observed union, which `pattern` represents.
pub fn germ_grain_estimate(
    observed: &GermGrainSummary,
    pattern: &PointConfiguration,
    radius: f64,
    window: &Window,
    oc: &OptimizerConfig,
) -> Result<EstimationResult> {
    oc.validate()?;
    let model = EnergyModel::area(radius)?;
    let fs = [
        TestFunction::ExposedSurface { radius },
        TestFunction::IsolatedIndicator { radius },
    ];
    let mut terms = ContrastTerms::build_on(&model, &fs, pattern, *window, oc.quadrature_nodes)?;
    terms.sums = vec![observed.exposed_length, observed.isolated_count as f64];
    let opt = minimize(|z, b| terms.contrast(z, b), oc)?;
    let border_corrected = window != pattern.window();
    let mut result = EstimationResult::from_optimum("germ_grain", &opt, *window, border_corrected);
    result
        .diagnostics
        .insert("exposed_length".into(), observed.exposed_length.into());
    result
        .diagnostics
        .insert("isolated_count".into(), observed.isolated_count.into());
    Ok(result)
}

/// Summarises `pattern` over its window (eroded by `2R` when
/// `border_correct`) and fits with [`germ_grain_estimate`].
pub fn germ_grain_fit(
    pattern: &PointConfiguration,
    radius: f64,
    oc: &OptimizerConfig,
    border_correct: bool,
) -> Result<EstimationResult> {
    let window = eroded(pattern.window(), 2.0 * radius, border_correct)?;
    let summary = germ_grain_summary(pattern, radius, &window);
    germ_grain_estimate(&summary, pattern, radius, &window, oc)
}

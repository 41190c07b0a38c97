use super::heat::midpoint;
use super::state::{FlowState, FLOW_INNER, PINNED_NODES};
use crate::error::{Error, Result};
use crate::geometry::{curvature_with, laplacian, InnerBoundary};

/// Per-node residual of `∂_t R = ΔR + 2|Rc|^2` between two states one step
/// apart, with the right-hand side taken on the midpoint metric. Pinned
/// outer nodes carry zero.
pub fn scalar_evolution_residual(before: &FlowState, after: &FlowState, dt: f64) -> Result<Vec<f64>> {
    if !before.metric().same_shape(after.metric()) {
        return Err(Error::MismatchedGrids);
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step {dt} must be positive")));
    }
    let mid = midpoint(before.metric(), after.metric())?;
    let curv = curvature_with(&mid, FLOW_INNER)?;
    let jets = mid.jets_with(FLOW_INNER);
    let lap = laplacian(&mid, &jets, &curv.scalar, InnerBoundary::OneSided);
    let rc2 = curv.ricci_norm_sq(mid.dim());
    let (r0, r1) = (&before.curvature().scalar, &after.curvature().scalar);
    let live = mid.len().saturating_sub(PINNED_NODES);
    Ok((0..mid.len()).map(|i| if i < live { (r1[i] - r0[i]) / dt - lap[i] - 2.0 * rc2[i] } else { 0.0 }).collect())
}

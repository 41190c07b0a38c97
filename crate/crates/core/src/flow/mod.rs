//! Method-of-lines Ricci flow of warped metrics and the scalar heat equation
//! on the evolving background.

mod heat;
mod integrator;
mod residual;
mod state;

pub use heat::{heat_step, heat_step_between, midpoint, HeatField};
pub use integrator::{cfl_dt, cfl_limit, evolve, ricci_flow_rhs, step, EvolveFailure, EvolveOptions, Observer};
pub use residual::scalar_evolution_residual;
pub use state::{
    outer_asymptotic_defect, FlowLimits, FlowState, OuterAnchor, ASYMPTOTIC_FLOOR, FIT_NODES, FLOW_INNER, PINNED_NODES,
    SCALAR_INNER,
};

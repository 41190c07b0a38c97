use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{curvature_with, CurvatureFields, InnerBoundary, JetBoundary, WarpedMetric};

/// Inner-edge stencils of the flow: the lapse obeys an ODE and is
/// differentiated one-sidedly; the areal radius satisfies a Neumann
/// condition on `b/r - 1`.
pub const FLOW_INNER: JetBoundary =
    JetBoundary { lapse: InnerBoundary::OneSided, areal: InnerBoundary::EvenReflection };
/// Inner-edge treatment of scalar fields (heat solutions) on the flow.
pub const SCALAR_INNER: InnerBoundary = InnerBoundary::EvenReflection;
/// Number of outer nodes held by the boundary condition.
pub const PINNED_NODES: usize = 4;
/// Number of interior nodes the outer extrapolation is fitted on.
pub const FIT_NODES: usize = 8;

/// Initial deviations `a - 1` and `b/r - 1` on the outermost nodes, which
/// the outer boundary condition extrapolates against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterAnchor {
    pub start: usize,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub exponent: f64,
}

impl OuterAnchor {
    pub fn from_metric(metric: &WarpedMetric) -> Self {
        let start = metric.len().saturating_sub(PINNED_NODES + FIT_NODES);
        Self {
            start,
            alpha: metric.alpha()[start..].to_vec(),
            beta: metric.beta()[start..].to_vec(),
            exponent: metric.profile().tau + 2.0,
        }
    }

    /// Overwrite the pinned nodes of the deviations `a - 1`, `b/r - 1` with
    /// the initial profile plus the `A r^{-p}` continuation of the interior
    /// change since `t = 0`. The change is driven by `Rc = O(r^{-τ-2})`, so
    /// `p = τ + 2`; a slower continuation would feed mass into the end.
    pub fn apply(&self, r: &[f64], alpha: &mut [f64], beta: &mut [f64]) {
        let n = r.len();
        if n < self.start + PINNED_NODES + FIT_NODES {
            return;
        }
        let fit = self.start..n - PINNED_NODES;
        let pinned = n - PINNED_NODES..n;
        let extrapolate = |current: &dyn Fn(usize) -> f64, initial: &[f64]| {
            let (mut num, mut den) = (0.0, 0.0);
            for i in fit.clone() {
                let w = r[i].powf(-self.exponent);
                num += (current(i) - initial[i - self.start]) * w;
                den += w * w;
            }
            num / den
        };
        let amp_a = extrapolate(&|i| alpha[i], &self.alpha);
        let amp_b = extrapolate(&|i| beta[i], &self.beta);
        for i in pinned {
            let w = r[i].powf(-self.exponent);
            alpha[i] = self.alpha[i - self.start] + amp_a * w;
            beta[i] = self.beta[i - self.start] + amp_b * w;
        }
    }
}

/// Thresholds fixed at the start of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowLimits {
    pub blowup_threshold: f64,
    /// Initial value of `max |a-1| r^τ` over the outer region.
    pub asymptotic_reference: f64,
}

impl FlowLimits {
    pub fn asymptotic_limit(&self) -> f64 {
        10.0 * self.asymptotic_reference.max(ASYMPTOTIC_FLOOR)
    }
}

/// Absolute floor below which outer deviations are treated as rounding.
pub const ASYMPTOTIC_FLOOR: f64 = 1e-12;

/// A metric at flow time `t` together with its curvature.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub(crate) metric: WarpedMetric,
    pub(crate) time: f64,
    pub(crate) step_count: u64,
    pub(crate) curvature: CurvatureFields,
    pub(crate) max_curv: f64,
    pub(crate) limits: FlowLimits,
    pub(crate) anchor: Arc<OuterAnchor>,
}

impl FlowState {
    /// Start a flow at `t = 0` with blow-up threshold
    /// `blowup_factor × sup|Rm|(0)`.
    pub fn new(metric: WarpedMetric, blowup_factor: f64) -> Result<Self> {
        if !(blowup_factor > 0.0) {
            return Err(Error::InvalidArgument(format!("blowup factor {blowup_factor} must be positive")));
        }
        let curvature = curvature_with(&metric, FLOW_INNER)?;
        let sup = curvature.sup_riem();
        let limits = FlowLimits {
            blowup_threshold: blowup_factor * sup,
            asymptotic_reference: outer_asymptotic_defect(&metric),
        };
        let anchor = Arc::new(OuterAnchor::from_metric(&metric));
        Ok(Self { metric, time: 0.0, step_count: 0, curvature, max_curv: sup, limits, anchor })
    }

    /// Rebuild a state from checkpointed parts.
    pub fn restore(
        metric: WarpedMetric,
        time: f64,
        step_count: u64,
        max_curv: f64,
        limits: FlowLimits,
        anchor: OuterAnchor,
    ) -> Result<Self> {
        if anchor.start + anchor.alpha.len() != metric.len() || anchor.alpha.len() != anchor.beta.len() {
            return Err(Error::MismatchedGrids);
        }
        let curvature = curvature_with(&metric, FLOW_INNER)?;
        Ok(Self { metric, time, step_count, curvature, max_curv, limits, anchor: Arc::new(anchor) })
    }

    pub(crate) fn successor(&self, metric: WarpedMetric, dt: f64) -> Result<Self> {
        let curvature = curvature_with(&metric, FLOW_INNER)?;
        let sup = curvature.sup_riem();
        Ok(Self {
            metric,
            time: self.time + dt,
            step_count: self.step_count + 1,
            max_curv: self.max_curv.max(sup),
            curvature,
            limits: self.limits,
            anchor: Arc::clone(&self.anchor),
        })
    }

    pub fn metric(&self) -> &WarpedMetric {
        &self.metric
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn curvature(&self) -> &CurvatureFields {
        &self.curvature
    }

    /// Running supremum of `|Rm|` since `t = 0`.
    pub fn max_curv(&self) -> f64 {
        self.max_curv
    }

    pub fn limits(&self) -> &FlowLimits {
        &self.limits
    }

    pub fn anchor(&self) -> &OuterAnchor {
        &self.anchor
    }

    pub fn with_limits(mut self, limits: FlowLimits) -> Self {
        self.limits = limits;
        self
    }
}

/// `max |a - 1| r^τ` over `r ≥ 0.1 r_max`.
pub fn outer_asymptotic_defect(metric: &WarpedMetric) -> f64 {
    let grid = metric.grid();
    let tau = metric.profile().tau;
    let r = grid.radii();
    grid.nodes_in(0.1 * grid.r_max(), grid.r_max())
        .map(|i| metric.alpha()[i].abs() * r[i].powf(tau))
        .fold(0.0, f64::max)
}

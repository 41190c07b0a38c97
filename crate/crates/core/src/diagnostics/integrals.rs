use serde::{Deserialize, Serialize};

use super::decay::{decay_fit_window, DecayFit};
use crate::error::{Error, Result};
use crate::geometry::{components_from_pair, curvature_of, CurvatureFields, RadialJets, RadialPair, WarpedMetric};

/// Outer window `[lo, hi]` used for tail and divergence fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: f64,
    pub hi: f64,
}

impl FitWindow {
    /// `[r_max/100, r_max/10]`.
    pub fn outer_decade(r_max: f64) -> Self {
        Self { lo: 0.01 * r_max, hi: 0.1 * r_max }
    }
}

/// Truncated `∫|R| dv` and an analytic bound for the part beyond `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Scalar {
    pub truncated: f64,
    pub tail_bound: f64,
    pub fit: Option<DecayFit>,
    /// The fitted decay does not beat `r^{-n}`, so integrability is not certified.
    pub tail_divergent: bool,
}

/// Scalar curvature below this fraction of `|Rm|` is cancellation noise.
pub const SCALAR_NOISE: f64 = 1e-9;

pub fn l1_scalar(metric: &WarpedMetric) -> Result<L1Scalar> {
    let curv = curvature_of(metric)?;
    l1_scalar_with(metric, &curv, FitWindow::outer_decade(metric.grid().r_max()))
}

/// As [`l1_scalar`] with given nodal curvature and fit window. A window in
/// which `|R| ≤ SCALAR_NOISE · |Rm|` everywhere counts as scalar-flat.
pub fn l1_scalar_with(metric: &WarpedMetric, curv: &CurvatureFields, window: FitWindow) -> Result<L1Scalar> {
    let scalar = &curv.scalar;
    let n = metric.dim();
    let grid = metric.grid();
    let dens: Vec<f64> = metric.volume_density().iter().zip(scalar).map(|(dv, s)| dv * s.abs()).collect();
    let truncated = grid.integrate(&dens);
    let in_window = grid.nodes_in(window.lo, window.hi);
    if in_window.clone().all(|i| scalar[i].abs() <= SCALAR_NOISE * curv.riem_norm[i]) {
        return Ok(L1Scalar { truncated, tail_bound: 0.0, fit: None, tail_divergent: false });
    }
    let fit = decay_fit_window(grid, scalar, window.lo, window.hi)?;
    let nf = n as f64;
    let (tail_bound, tail_divergent) = if fit.exponent > nf {
        let r_max = grid.r_max();
        let c = fit.value_at(r_max) * r_max.powf(fit.exponent);
        (metric.unit_cross_section() * c * r_max.powf(nf - fit.exponent) / (fit.exponent - nf), false)
    } else {
        (f64::INFINITY, true)
    };
    Ok(L1Scalar { truncated, tail_bound, fit: Some(fit), tail_divergent })
}

/// Parameters of `W^{k,q}_τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedNormSpec {
    pub k: usize,
    pub q_exp: f64,
    pub tau: f64,
}

impl WeightedNormSpec {
    pub fn new(k: usize, q_exp: f64, tau: f64) -> Result<Self> {
        if k > 2 {
            return Err(Error::InvalidArgument(format!("derivative count k = {k} must be 0, 1 or 2")));
        }
        if !(q_exp >= 1.0) {
            return Err(Error::InvalidArgument(format!("integrability exponent q = {q_exp} must be >= 1")));
        }
        Ok(Self { k, q_exp, tau })
    }

    /// `k = 1`, `q = 2` and a weight halfway between `(n-2)/2` and the data's order.
    pub fn default_for(n: usize, tau: f64) -> Self {
        Self { k: 1, q_exp: 2.0, tau: 0.5 * (tau + (n as f64 - 2.0) / 2.0) }
    }
}

/// `Σ_i (∫ |r^{τ+i} ∇^i h|^q r^{-n} dx)^{1/q}` for `h = g - δ`, truncated at `r_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedNorm {
    pub value: f64,
    pub terms: Vec<f64>,
    /// Bound on the `q`-th power of each term's integral beyond `r_max`.
    pub tail_bounds: Vec<f64>,
}

pub fn weighted_sobolev_norm(metric: &WarpedMetric, spec: &WeightedNormSpec) -> Result<WeightedNorm> {
    let jets = metric.jets();
    let pairs: Vec<RadialPair> = (0..jets.len()).map(|i| RadialPair::from_jet(&jets.at(i))).collect();
    weighted_norm_of_pairs(metric, &jets, &pairs, spec, None)
}

/// Norm of `g - g_ref` with both metrics on the same grid.
pub fn weighted_norm_of_difference(
    metric: &WarpedMetric,
    reference: &WarpedMetric,
    spec: &WeightedNormSpec,
) -> Result<WeightedNorm> {
    if !metric.same_shape(reference) {
        return Err(Error::MismatchedGrids);
    }
    let (j1, j0) = (metric.jets(), reference.jets());
    let pairs: Vec<RadialPair> =
        (0..j1.len()).map(|i| RadialPair::from_jet(&j1.at(i)).difference(&RadialPair::from_jet(&j0.at(i)))).collect();
    weighted_norm_of_pairs(metric, &j1, &pairs, spec, None)
}

pub(crate) fn weighted_norm_of_pairs(
    metric: &WarpedMetric,
    jets: &RadialJets,
    pairs: &[RadialPair],
    spec: &WeightedNormSpec,
    window: Option<FitWindow>,
) -> Result<WeightedNorm> {
    let spec = WeightedNormSpec::new(spec.k, spec.q_exp, spec.tau)?;
    let n = metric.dim();
    let grid = metric.grid();
    let window = window.unwrap_or_else(|| FitWindow::outer_decade(grid.r_max()));
    let area = metric.unit_cross_section();
    let mut densities = vec![vec![0.0; pairs.len()]; spec.k + 1];
    for (i, pair) in pairs.iter().enumerate() {
        let r = jets.r[i];
        let mut x = vec![0.0; n];
        x[0] = r;
        let c = components_from_pair(n, pair, &x, spec.k >= 2);
        let norms = [
            c.deviation.iter().map(|v| v * v).sum::<f64>().sqrt(),
            c.dg.iter().map(|v| v * v).sum::<f64>().sqrt(),
            c.ddg.as_ref().map_or(0.0, |d| d.iter().map(|v| v * v).sum::<f64>().sqrt()),
        ];
        for (order, dens) in densities.iter_mut().enumerate() {
            let weighted = r.powf(spec.tau + order as f64) * norms[order];
            // |·|^q r^{-n} times the Euclidean shell measure r^{n-1} dr
            dens[i] = area * weighted.powf(spec.q_exp) / r;
        }
    }
    let mut terms = Vec::with_capacity(spec.k + 1);
    let mut tail_bounds = Vec::with_capacity(spec.k + 1);
    for dens in &densities {
        let in_window = grid.nodes_in(window.lo, window.hi);
        let tail = if dens[in_window].iter().all(|&v| v == 0.0) {
            0.0
        } else {
            let fit = decay_fit_window(grid, dens, window.lo, window.hi)?;
            if fit.exponent <= 1.0 {
                return Err(Error::DivergentNorm { exponent: fit.exponent });
            }
            fit.value_at(grid.r_max()) * grid.r_max() / (fit.exponent - 1.0)
        };
        terms.push(grid.integrate(dens).powf(1.0 / spec.q_exp));
        tail_bounds.push(tail);
    }
    Ok(WeightedNorm { value: terms.iter().sum(), terms, tail_bounds })
}

/// `‖g - δ‖_{W^{k,q}_τ} + ‖R‖_{L^1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtauNorm {
    pub weighted: f64,
    pub l1: f64,
    pub total: f64,
}

pub fn mtau_norm(metric: &WarpedMetric, spec: &WeightedNormSpec) -> Result<MtauNorm> {
    let w = weighted_sobolev_norm(metric, spec)?;
    let l1 = l1_scalar(metric)?;
    Ok(MtauNorm { weighted: w.value, l1: l1.truncated, total: w.value + l1.truncated })
}

/// `‖g - g_ref‖_{W^{k,q}_τ} + ‖R(g) - R(g_ref)‖_{L^1(g_ref)}`.
pub fn mtau_distance(metric: &WarpedMetric, reference: &WarpedMetric, spec: &WeightedNormSpec) -> Result<MtauNorm> {
    let w = weighted_norm_of_difference(metric, reference, spec)?;
    let (c1, c0) = (curvature_of(metric)?, curvature_of(reference)?);
    let dens: Vec<f64> =
        reference.volume_density().iter().enumerate().map(|(i, dv)| dv * (c1.scalar[i] - c0.scalar[i]).abs()).collect();
    let l1 = reference.grid().integrate(&dens);
    Ok(MtauNorm { weighted: w.value, l1, total: w.value + l1 })
}

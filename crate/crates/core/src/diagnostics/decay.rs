use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RadialGrid;

/// Fewest samples a decay fit accepts.
pub const MIN_FIT_SAMPLES: usize = 8;
/// Values are floored here before taking logarithms.
pub const VALUE_FLOOR: f64 = 1e-30;

/// `|value| ≈ C r^{-exponent}` by least squares in log–log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub exponent: f64,
    pub log_constant: f64,
    /// Root-mean-square residual of the log–log fit.
    pub residual: f64,
    /// Some samples were below [`VALUE_FLOOR`].
    pub floored: bool,
    pub samples: usize,
}

impl DecayFit {
    pub fn value_at(&self, r: f64) -> f64 {
        (self.log_constant - self.exponent * r.ln()).exp()
    }
}

pub fn decay_fit(samples: &[(f64, f64)]) -> Result<DecayFit> {
    let count = samples.len();
    let (lo, hi) = samples.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &(r, _)| (lo.min(r), hi.max(r)));
    if count < MIN_FIT_SAMPLES || !(lo > 0.0) || hi / lo < 10.0 * (1.0 - 1e-9) {
        return Err(Error::InsufficientSpan { samples: count, span: if lo > 0.0 { hi / lo } else { 0.0 } });
    }
    let mut floored = false;
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(r, v)| {
            let v = v.abs();
            if !(v >= VALUE_FLOOR) {
                floored = true;
            }
            (r.ln(), v.max(VALUE_FLOOR).ln())
        })
        .collect();
    let nf = count as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    // constant data (e.g. everything floored) has slope exactly zero
    let slope = if pts.iter().all(|p| p.1 == pts[0].1) { 0.0 } else { sxy / sxx };
    let intercept = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    Ok(DecayFit { exponent: -slope, log_constant: intercept, residual: (ss / nf).sqrt(), floored, samples: count })
}

/// Fit over the nodes of `grid` inside `[lo, hi]`.
pub fn decay_fit_window(grid: &RadialGrid, values: &[f64], lo: f64, hi: f64) -> Result<DecayFit> {
    let r = grid.radii();
    // widen to the enclosing nodes so the samples cover the whole window
    let inner = grid.nodes_in(lo, hi);
    let start = if inner.start > 0 && r[inner.start] > lo { inner.start - 1 } else { inner.start };
    let end = if inner.end < r.len() && r[inner.end - 1] < hi { inner.end + 1 } else { inner.end };
    let samples: Vec<(f64, f64)> = (start..end).map(|i| (r[i], values[i])).collect();
    decay_fit(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let s: Vec<(f64, f64)> =
            (0..20).map(|k| 10f64.powf(2.0 + k as f64 / 19.0)).map(|r| (r, 3.0 * r.powi(-2))).collect();
        let f = decay_fit(&s).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!(!f.floored);
    }

    #[test]
    fn rejects_short_windows() {
        let s: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64, 1.0)).collect();
        assert!(matches!(decay_fit(&s[..5]), Err(Error::InsufficientSpan { .. })));
        assert!(decay_fit(&s[..9]).is_err());
        assert!(decay_fit(&s[..10]).is_ok());
    }

    #[test]
    fn zeros_are_floored_and_flagged() {
        let s: Vec<(f64, f64)> = (1..=20).map(|k| (k as f64, 0.0)).collect();
        let f = decay_fit(&s).unwrap();
        assert!(f.floored);
        assert!(f.exponent.abs() < 1e-12);
    }
}

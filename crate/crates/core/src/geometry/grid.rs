use serde::{Deserialize, Serialize};

use super::stencil::{fornberg, InnerBoundary, UniformStencil};
use crate::error::{Error, Result};

/// Smallest node count any operation accepts.
pub const MIN_NODES: usize = 6;
/// Required dynamic range `r_max / r_min`.
pub const MIN_RANGE: f64 = 1.0e3;

const INTERP_POINTS: usize = 8;

/// Map from the computational coordinate `x` (uniform nodes) to radius `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Compactification {
    /// `x = r / (r + scale)`.
    Rational { scale: f64 },
    /// `x = r`.
    Identity,
}

impl Compactification {
    pub fn radius(&self, x: f64) -> f64 {
        match *self {
            Self::Rational { scale } => scale * x / (1.0 - x),
            Self::Identity => x,
        }
    }

    pub fn coordinate(&self, r: f64) -> f64 {
        match *self {
            Self::Rational { scale } => r / (r + scale),
            Self::Identity => r,
        }
    }

    /// `dr/dx` and `d^2r/dx^2`.
    pub fn jacobian(&self, x: f64) -> (f64, f64) {
        match *self {
            Self::Rational { scale } => {
                let s = 1.0 - x;
                (scale / (s * s), 2.0 * scale / (s * s * s))
            }
            Self::Identity => (1.0, 0.0),
        }
    }
}

/// One quadrature panel `[r_p, r_{p+1}]` integrated with the cubic through
/// four neighbouring nodes.
#[derive(Debug, Clone)]
struct Panel {
    start: usize,
    weights: [f64; 4],
}

/// Radial mesh, uniform in the compactified coordinate.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    map: Compactification,
    x: Vec<f64>,
    dx: f64,
    r: Vec<f64>,
    r_x: Vec<f64>,
    r_xx: Vec<f64>,
    weights: Vec<f64>,
    panels: Vec<Panel>,
    stencil: UniformStencil,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map && self.r == other.r
    }
}

impl RadialGrid {
    /// `nodes` points uniform in `x = r/(r+scale)` between `r_min` and `r_max`.
    pub fn compactified(nodes: usize, r_min: f64, r_max: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidGrid(format!("compactification scale {scale} must be positive")));
        }
        Self::build(Compactification::Rational { scale }, nodes, r_min, r_max)
    }

    /// `nodes` points uniform in `r`.
    pub fn uniform(nodes: usize, r_min: f64, r_max: f64) -> Result<Self> {
        Self::build(Compactification::Identity, nodes, r_min, r_max)
    }

    pub fn build(map: Compactification, nodes: usize, r_min: f64, r_max: f64) -> Result<Self> {
        if nodes < MIN_NODES {
            return Err(Error::GridTooCoarse { nodes, min: MIN_NODES });
        }
        if !(r_min > 0.0) || !r_max.is_finite() {
            return Err(Error::InvalidGrid(format!("need 0 < r_min, finite r_max; got {r_min}, {r_max}")));
        }
        if r_max / r_min < MIN_RANGE {
            return Err(Error::InvalidGrid(format!(
                "r_max/r_min = {} is below the required {MIN_RANGE}",
                r_max / r_min
            )));
        }
        let x0 = map.coordinate(r_min);
        let x1 = map.coordinate(r_max);
        let dx = (x1 - x0) / (nodes - 1) as f64;
        let x: Vec<f64> = (0..nodes).map(|i| x0 + i as f64 * dx).collect();
        let mut r: Vec<f64> = x.iter().map(|&xi| map.radius(xi)).collect();
        r[0] = r_min;
        r[nodes - 1] = r_max;
        let (r_x, r_xx) = x.iter().map(|&xi| map.jacobian(xi)).unzip();
        let mut grid = Self {
            map,
            x,
            dx,
            r,
            r_x,
            r_xx,
            weights: Vec::new(),
            panels: Vec::new(),
            stencil: UniformStencil::new(nodes),
        };
        grid.check_monotone()?;
        grid.build_quadrature();
        Ok(grid)
    }

    /// Reconstruct a grid from stored radii, inferring the compactification
    /// scale when no map is given.
    pub fn from_radii(radii: &[f64], map: Option<Compactification>) -> Result<Self> {
        let n = radii.len();
        if n < MIN_NODES {
            return Err(Error::GridTooCoarse { nodes: n, min: MIN_NODES });
        }
        let (r_min, r_max) = (radii[0], radii[n - 1]);
        let map = match map {
            Some(m) => m,
            None => infer_map(radii)?,
        };
        let grid = Self::build(map, n, r_min, r_max)?;
        let worst = grid.r.iter().zip(radii).map(|(a, b)| ((a - b) / b).abs()).fold(0.0, f64::max);
        if worst > 1e-9 {
            return Err(Error::InvalidGrid(format!(
                "stored radii are not uniform in any supported compactification (mismatch {worst:e})"
            )));
        }
        Ok(grid)
    }

    fn check_monotone(&self) -> Result<()> {
        for (i, w) in self.r.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::DegenerateGrid { index: i });
            }
        }
        Ok(())
    }

    fn build_quadrature(&mut self) {
        let n = self.r.len();
        let mut weights = vec![0.0; n];
        let mut panels = Vec::with_capacity(n - 1);
        for p in 0..n - 1 {
            let start = p.saturating_sub(1).min(n - 4);
            let w = self.panel_weights(start, self.r[p], self.r[p + 1]);
            for (k, wk) in w.iter().enumerate() {
                weights[start + k] += wk;
            }
            panels.push(Panel { start, weights: w });
        }
        self.weights = weights;
        self.panels = panels;
    }

    /// Integrals over `[lo, hi]` of the cubic Lagrange basis (in `x`) on
    /// nodes `start..start+4`, against the Jacobian `dr/dx`.
    ///
    /// The weights are rescaled so that constants integrate exactly.
    fn panel_weights(&self, start: usize, lo: f64, hi: f64) -> [f64; 4] {
        const GL_X: [f64; 8] = [
            -0.960_289_856_497_536_3,
            -0.796_666_477_413_626_7,
            -0.525_532_409_916_329_0,
            -0.183_434_642_495_649_8,
            0.183_434_642_495_649_8,
            0.525_532_409_916_329_0,
            0.796_666_477_413_626_7,
            0.960_289_856_497_536_3,
        ];
        const GL_W: [f64; 8] = [
            0.101_228_536_290_376_3,
            0.222_381_034_453_374_5,
            0.313_706_645_877_887_3,
            0.362_683_783_378_362_0,
            0.362_683_783_378_362_0,
            0.313_706_645_877_887_3,
            0.222_381_034_453_374_5,
            0.101_228_536_290_376_3,
        ];
        let (x_lo, x_hi) = (self.map.coordinate(lo), self.map.coordinate(hi));
        let nodes: Vec<f64> = (0..4).map(|k| (self.x[start + k] - self.x[start]) / self.dx).collect();
        let half = 0.5 * (x_hi - x_lo);
        let mid = 0.5 * (x_hi + x_lo);
        let mut w = [0.0; 4];
        for (gx, gw) in GL_X.iter().zip(GL_W) {
            let xq = mid + half * gx;
            let z = (xq - self.x[start]) / self.dx;
            let (rx, _) = self.map.jacobian(xq);
            for (j, wj) in w.iter_mut().enumerate() {
                let mut l = 1.0;
                for (k, &nk) in nodes.iter().enumerate() {
                    if k != j {
                        l *= (z - nk) / (nodes[j] - nk);
                    }
                }
                *wj += gw * half * rx * l;
            }
        }
        let total: f64 = w.iter().sum();
        if total != 0.0 {
            let scale = (hi - lo) / total;
            w.iter_mut().for_each(|v| *v *= scale);
        }
        w
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn r_min(&self) -> f64 {
        self.r[0]
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    pub fn map(&self) -> Compactification {
        self.map
    }

    /// Computational coordinate of each node.
    pub fn coordinates(&self) -> &[f64] {
        &self.x
    }

    pub fn spacing(&self) -> f64 {
        self.dx
    }

    /// `dr/dx` at each node.
    pub fn jacobian(&self) -> &[f64] {
        &self.r_x
    }

    /// `d^2r/dx^2` at each node.
    pub fn jacobian_derivative(&self) -> &[f64] {
        &self.r_xx
    }

    /// Quadrature weights for `∫ f dr` over `[r_min, r_max]`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// First and second `r`-derivatives of a nodal field.
    pub fn radial_derivatives(&self, f: &[f64], inner: InnerBoundary) -> (Vec<f64>, Vec<f64>) {
        let (fx, fxx) = self.stencil.apply(f, inner);
        let h = self.dx;
        fx.iter()
            .zip(&fxx)
            .zip(self.r_x.iter().zip(&self.r_xx))
            .map(|((&d1, &d2), (&rx, &rxx))| {
                let d1 = d1 / h;
                let d2 = d2 / (h * h);
                let fr = d1 / rx;
                (fr, (d2 - fr * rxx) / (rx * rx))
            })
            .unzip()
    }

    /// `∫ f dr` over the whole grid (fixed-order summation).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    /// `∫ f dr` over the node range `[r[lo], r[hi]]`.
    pub fn integrate_nodes(&self, f: &[f64], lo: usize, hi: usize) -> f64 {
        self.panels[lo..hi]
            .iter()
            .map(|p| p.weights.iter().enumerate().map(|(k, w)| w * f[p.start + k]).sum::<f64>())
            .sum()
    }

    /// `∫ f dr` from `r_min` to `upper`.
    pub fn integrate_to(&self, f: &[f64], upper: f64) -> Result<f64> {
        self.check_range(upper)?;
        let p = self.interval_of(upper);
        let mut total = self.integrate_nodes(f, 0, p);
        if upper > self.r[p] {
            let start = self.panels[p].start;
            let w = self.panel_weights(start, self.r[p], upper);
            total += w.iter().enumerate().map(|(k, wk)| wk * f[start + k]).sum::<f64>();
        }
        Ok(total)
    }

    fn check_range(&self, r: f64) -> Result<()> {
        if !(r >= self.r_min() && r <= self.r_max()) {
            return Err(Error::InterpolationOutOfRange { r, lo: self.r_min(), hi: self.r_max() });
        }
        Ok(())
    }

    /// Index `p` of the interval `[r_p, r_{p+1}]` containing `r`.
    pub fn interval_of(&self, r: f64) -> usize {
        let n = self.r.len();
        match self.r.binary_search_by(|v| v.partial_cmp(&r).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    /// Index of the node closest to `r`.
    pub fn nearest_node(&self, r: f64) -> usize {
        let p = self.interval_of(r.clamp(self.r_min(), self.r_max()));
        if (r - self.r[p]).abs() <= (self.r[p + 1] - r).abs() {
            p
        } else {
            p + 1
        }
    }

    /// Eight-point Lagrange interpolant (in `x`) of a nodal field and its
    /// `r`-derivative at an arbitrary radius.
    pub fn interpolate(&self, f: &[f64], r: f64) -> Result<(f64, f64)> {
        self.check_range(r)?;
        let n = self.r.len();
        let pts = INTERP_POINTS.min(n);
        let p = self.interval_of(r);
        let start = (p + 1).saturating_sub(pts / 2).min(n - pts);
        let xq = self.map.coordinate(r);
        let xs: Vec<f64> = (start..start + pts).map(|i| (self.x[i] - xq) / self.dx).collect();
        let w = fornberg(0.0, &xs, 1);
        let mut value = 0.0;
        let mut dfdx = 0.0;
        for k in 0..pts {
            value += w[0][k] * f[start + k];
            dfdx += w[1][k] * f[start + k];
        }
        let (rx, _) = self.map.jacobian(xq);
        Ok((value, dfdx / (self.dx * rx)))
    }

    /// Nodes whose radius lies in `[lo, hi]`.
    pub fn nodes_in(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let a = self.r.partition_point(|&v| v < lo);
        let b = self.r.partition_point(|&v| v <= hi);
        a..b.max(a)
    }

    /// Same nodes scaled by `lambda` (radii and compactification scale).
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        let map = match self.map {
            Compactification::Rational { scale } => Compactification::Rational { scale: scale * lambda },
            Compactification::Identity => {
                return Err(Error::InvalidArgument("identity grids cannot be rescaled".into()))
            }
        };
        Self::build(map, self.len(), self.r_min() * lambda, self.r_max() * lambda)
    }
}

fn infer_map(radii: &[f64]) -> Result<Compactification> {
    let n = radii.len();
    let uniform_residual = |x: &dyn Fn(f64) -> f64| {
        let x0 = x(radii[0]);
        let step = (x(radii[n - 1]) - x0) / (n - 1) as f64;
        (x(radii[1]) - x0 - step) / step
    };
    if uniform_residual(&|r| r).abs() < 1e-9 {
        return Ok(Compactification::Identity);
    }
    // The residual is monotone in log(scale); bisect it.
    let f = |log_l: f64| {
        let l = log_l.exp();
        uniform_residual(&|r| r / (r + l))
    };
    let (mut lo, mut hi) = ((radii[0] * 1e-6).ln(), (radii[n - 1] * 1e6).ln());
    let (flo, fhi) = (f(lo), f(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidGrid("cannot infer compactification scale from radii".into()));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid).signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Compactification::Rational { scale: (0.5 * (lo + hi)).exp() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_dynamic_range() {
        assert!(matches!(RadialGrid::compactified(64, 1.0, 100.0, 30.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(RadialGrid::compactified(4, 1.0, 1e4, 30.0), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn weights_integrate_constants_and_decaying_profiles() {
        let g = RadialGrid::compactified(257, 1.0, 1e4, 30.0).unwrap();
        assert!(g.weights().iter().all(|&w| w > 0.0));
        let ones = vec![1.0; g.len()];
        let exact = g.r_max() - g.r_min();
        assert!(((g.integrate(&ones) - exact) / exact).abs() < 1e-12);
        let g = RadialGrid::compactified(2048, 1.0, 1e4, 30.0).unwrap();
        let decay: Vec<f64> = g.radii().iter().map(|r| r.powi(-2)).collect();
        let exact = 1.0 - 1.0 / g.r_max();
        assert!(((g.integrate(&decay) - exact) / exact).abs() < 5e-8);
        let partial = g.integrate_to(&decay, 1234.5).unwrap();
        let exact = 1.0 - 1.0 / 1234.5;
        assert!(((partial - exact) / exact).abs() < 5e-8);
    }

    #[test]
    fn interpolation_recovers_smooth_profiles() {
        let g = RadialGrid::compactified(2048, 1.0, 1e4, 30.0).unwrap();
        let f: Vec<f64> = g.radii().iter().map(|r| 1.0 / r).collect();
        for &r in &[1.3, 17.0, 333.3, 8000.0] {
            let (v, d) = g.interpolate(&f, r).unwrap();
            assert!(((v - 1.0 / r) * r).abs() < 1e-10, "value at {r}");
            assert!(((d + 1.0 / (r * r)) * r * r).abs() < 1e-8, "derivative at {r}");
        }
        assert!(g.interpolate(&f, 0.5).is_err());
    }

    #[test]
    fn radial_derivatives_of_power_law() {
        let g = RadialGrid::compactified(2048, 1.0, 1e4, 30.0).unwrap();
        let f: Vec<f64> = g.radii().iter().map(|r| r.powf(-1.5)).collect();
        let (d1, d2) = g.radial_derivatives(&f, InnerBoundary::OneSided);
        for i in (0..g.len()).step_by(37) {
            let r = g.radii()[i];
            let e1 = -1.5 * r.powf(-2.5);
            let e2 = 3.75 * r.powf(-3.5);
            let tol = if i < 2 || r > 0.5 * g.r_max() { 1e-3 } else { 1e-6 };
            assert!(((d1[i] - e1) / e1).abs() < tol, "d1 at r={r}");
            assert!(((d2[i] - e2) / e2).abs() < tol, "d2 at r={r}");
        }
    }

    #[test]
    fn infers_scale_from_radii() {
        let g = RadialGrid::compactified(300, 2.0, 3e4, 55.0).unwrap();
        let back = RadialGrid::from_radii(g.radii(), None).unwrap();
        match back.map() {
            Compactification::Rational { scale } => assert!((scale - 55.0).abs() < 1e-8),
            _ => panic!("wrong map"),
        }
        let u = RadialGrid::uniform(1001, 0.1, 100.1).unwrap();
        assert_eq!(RadialGrid::from_radii(u.radii(), None).unwrap().map(), Compactification::Identity);
    }
}

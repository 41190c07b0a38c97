//! Independent curvature oracle: the warped metric is written out as a full
//! `n × n` coordinate metric, Christoffel symbols and the Riemann tensor are
//! taken by nested finite differences, and the result is contracted.

use super::curvature::PointCurvature;
use super::metric::WarpedMetric;
use crate::error::{Error, Result};

/// Relative step used by [`brute_force_curvature`].
pub const DEFAULT_RELATIVE_STEP: f64 = 0.02;

struct CoordinateMetric<'a> {
    metric: &'a WarpedMetric,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    n: usize,
}

impl<'a> CoordinateMetric<'a> {
    fn new(metric: &'a WarpedMetric) -> Self {
        Self { metric, alpha: metric.alpha().to_vec(), beta: metric.beta().to_vec(), n: metric.dim() }
    }

    /// `g_ij(y)`, row-major.
    fn at(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let rho = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let grid = self.metric.grid();
        let (da, _) = grid.interpolate(&self.alpha, rho)?;
        let (db, _) = grid.interpolate(&self.beta, rho)?;
        let alpha = (1.0 + da) * (1.0 + da);
        let beta = (1.0 + db) * (1.0 + db);
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = (alpha - beta) * y[i] * y[j] / (rho * rho) + if i == j { beta } else { 0.0 };
            }
        }
        Ok(g)
    }

    /// Fourth-order central difference of a tensor-valued function along each axis.
    fn gradient<F>(&self, y: &[f64], h: f64, f: F) -> Result<Vec<Vec<f64>>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let mut out = Vec::with_capacity(self.n);
        for k in 0..self.n {
            let shifted = |s: f64| {
                let mut p = y.to_vec();
                p[k] += s * h;
                f(&p)
            };
            let (m2, m1, p1, p2) = (shifted(-2.0)?, shifted(-1.0)?, shifted(1.0)?, shifted(2.0)?);
            out.push((0..m2.len()).map(|i| (m2[i] - 8.0 * m1[i] + 8.0 * p1[i] - p2[i]) / (12.0 * h)).collect());
        }
        Ok(out)
    }

    /// `Γ^k_ij` laid out as `[(k*n + i)*n + j]`.
    fn christoffel(&self, y: &[f64], h: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let g = self.at(y)?;
        let ginv = invert(&g, n)?;
        let dg = self.gradient(y, h, |p| self.at(p))?;
        let mut gamma = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[k * n + l] * (dg[i][j * n + l] + dg[j][i * n + l] - dg[l][i * n + j]);
                    }
                    gamma[(k * n + i) * n + j] = 0.5 * s;
                }
            }
        }
        Ok(gamma)
    }

    fn curvature(&self, y: &[f64], h: f64) -> Result<PointCurvature> {
        let n = self.n;
        let g = self.at(y)?;
        let ginv = invert(&g, n)?;
        let gamma = self.christoffel(y, h)?;
        let dgamma = self.gradient(y, h, |p| self.christoffel(p, h))?;
        let idx3 = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
        // R^l_{jki}: R(∂_j, ∂_k) ∂_i = R^l_{jki} ∂_l
        let mut riem_up = vec![0.0; n * n * n * n];
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for i in 0..n {
                        let mut v = dgamma[j][idx3(l, k, i)] - dgamma[k][idx3(l, j, i)];
                        for m in 0..n {
                            v += gamma[idx3(l, j, m)] * gamma[idx3(m, k, i)]
                                - gamma[idx3(l, k, m)] * gamma[idx3(m, j, i)];
                        }
                        riem_up[((l * n + j) * n + k) * n + i] = v;
                    }
                }
            }
        }
        let i4 = |a: usize, b: usize, c: usize, d: usize| ((a * n + b) * n + c) * n + d;
        let mut riem = vec![0.0; n * n * n * n];
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for i in 0..n {
                        riem[i4(l, j, k, i)] = (0..n).map(|m| g[l * n + m] * riem_up[i4(m, j, k, i)]).sum();
                    }
                }
            }
        }
        let sectional =
            |a: usize, b: usize| riem[i4(a, a, b, b)] / (g[a * n + a] * g[b * n + b] - g[a * n + b] * g[a * n + b]);
        let k_rad = sectional(0, 1);
        let k_sph = sectional(1, 2);
        let ricci = |k: usize, i: usize| (0..n).map(|j| riem_up[i4(j, j, k, i)]).sum::<f64>();
        let rc_rad = ricci(0, 0) / g[0];
        let rc_sph = ricci(1, 1) / g[n + 1];
        let mut scalar = 0.0;
        for k in 0..n {
            for i in 0..n {
                scalar += ginv[k * n + i] * ricci(k, i);
            }
        }
        // raise all four indices one at a time
        let mut raised = riem.clone();
        for slot in 0..4 {
            let mut next = vec![0.0; raised.len()];
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        for d in 0..n {
                            let idx = [a, b, c, d];
                            let mut s = 0.0;
                            for m in 0..n {
                                let mut src = idx;
                                src[slot] = m;
                                s += ginv[idx[slot] * n + m] * raised[i4(src[0], src[1], src[2], src[3])];
                            }
                            next[i4(a, b, c, d)] = s;
                        }
                    }
                }
            }
            raised = next;
        }
        let norm_sq: f64 = riem.iter().zip(&raised).map(|(x, y)| x * y).sum();
        Ok(PointCurvature { k_rad, k_sph, rc_rad, rc_sph, scalar, riem_norm: norm_sq.max(0.0).sqrt() })
    }
}

fn invert(m: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x * n + col].abs().partial_cmp(&a[y * n + col].abs()).unwrap()).unwrap();
        if a[pivot * n + col].abs() < 1e-300 {
            return Err(Error::InvalidArgument("singular coordinate metric".into()));
        }
        for k in 0..n {
            a.swap(col * n + k, pivot * n + k);
            inv.swap(col * n + k, pivot * n + k);
        }
        let p = a[col * n + col];
        for k in 0..n {
            a[col * n + k] /= p;
            inv[col * n + k] /= p;
        }
        for row in 0..n {
            if row != col {
                let f = a[row * n + col];
                for k in 0..n {
                    a[row * n + k] -= f * a[col * n + k];
                    inv[row * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    Ok(inv)
}

/// Curvature at radius `r` by the brute-force coordinate computation.
///
/// Richardson pairs are formed over the steps `h_k = 0.02 r 2^-k`; the pair
/// whose result changes least against its finer neighbour is returned. Large
/// steps miss short-scale structure and small ones drown in rounding, so the
/// plateau in between is taken.
pub fn brute_force_curvature(metric: &WarpedMetric, r: f64) -> Result<PointCurvature> {
    let h0 = DEFAULT_RELATIVE_STEP * r;
    check_halo(metric, r, h0)?;
    let cm = CoordinateMetric::new(metric);
    let mut y = vec![0.0; metric.dim()];
    y[0] = r;
    let raw =
        (0..=ADAPTIVE_LEVELS).map(|k| cm.curvature(&y, h0 * 0.5f64.powi(k as i32))).collect::<Result<Vec<_>>>()?;
    let rich: Vec<PointCurvature> = raw.windows(2).map(|w| richardson(&w[0], &w[1])).collect();
    let best = (0..rich.len() - 1)
        .map(|k| (k + 1, rich[k + 1].relative_error(&rich[k])))
        .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
    Ok(rich[best.0])
}

/// Halvings of the step tried by [`brute_force_curvature`].
pub const ADAPTIVE_LEVELS: usize = 5;

fn check_halo(metric: &WarpedMetric, r: f64, h: f64) -> Result<()> {
    let grid = metric.grid();
    // nested stencils reach 4h along two axes
    let halo = 4.0 * h * 2f64.sqrt();
    if r - halo < grid.r_min() || r + halo > grid.r_max() {
        return Err(Error::BoundaryTooClose { r });
    }
    Ok(())
}

fn richardson(coarse: &PointCurvature, fine: &PointCurvature) -> PointCurvature {
    let rich = |c: f64, f: f64| (16.0 * f - c) / 15.0;
    PointCurvature {
        k_rad: rich(coarse.k_rad, fine.k_rad),
        k_sph: rich(coarse.k_sph, fine.k_sph),
        rc_rad: rich(coarse.rc_rad, fine.rc_rad),
        rc_sph: rich(coarse.rc_sph, fine.rc_sph),
        scalar: rich(coarse.scalar, fine.scalar),
        riem_norm: rich(coarse.riem_norm, fine.riem_norm),
    }
}

/// Richardson combination of the steps `h` and `h/2`.
pub fn brute_force_curvature_with_step(metric: &WarpedMetric, r: f64, h: f64) -> Result<PointCurvature> {
    check_halo(metric, r, h)?;
    let cm = CoordinateMetric::new(metric);
    let mut y = vec![0.0; metric.dim()];
    y[0] = r;
    Ok(richardson(&cm.curvature(&y, h)?, &cm.curvature(&y, 0.5 * h)?))
}

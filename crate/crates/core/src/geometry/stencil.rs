//! Finite-difference and interpolation weights.

/// Weights for derivatives `0..=order` at `z` from the nodes `x`.
///
/// Fornberg's recursion; `w[k][j]` multiplies `f(x[j])` in the `k`-th
/// derivative. Works for arbitrary (distinct) node positions.
pub fn fornberg(z: f64, x: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    if n == 0 {
        return c;
    }
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// How the first two nodes are differentiated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerBoundary {
    /// Sixth-point one-sided stencils.
    OneSided,
    /// Centered stencils on the even reflection of the field about the first
    /// node (zero first derivative at the inner edge).
    EvenReflection,
}

/// Inner-edge treatment for the two metric functions separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JetBoundary {
    pub lapse: InnerBoundary,
    pub areal: InnerBoundary,
}

impl From<InnerBoundary> for JetBoundary {
    fn from(b: InnerBoundary) -> Self {
        Self { lapse: b, areal: b }
    }
}

#[derive(Debug, Clone)]
struct Row {
    start: usize,
    d1: Vec<f64>,
    d2: Vec<f64>,
}

/// Fourth-order first and second derivatives on `len` equispaced nodes with
/// unit spacing. Callers divide by `h` and `h^2`.
#[derive(Debug, Clone)]
pub struct UniformStencil {
    len: usize,
    boundary_rows: Vec<Row>,
    reflected_rows: [Vec<(usize, f64, f64)>; 2],
}

const C1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const C2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

impl UniformStencil {
    pub fn new(len: usize) -> Self {
        assert!(len >= 6, "stencil needs at least 6 nodes");
        let pts: Vec<f64> = (0..6).map(|j| j as f64).collect();
        let mut boundary_rows = Vec::with_capacity(4);
        // rows 0, 1 (left) and len-2, len-1 (right)
        for &z in &[0.0, 1.0] {
            let w = fornberg(z, &pts, 2);
            boundary_rows.push(Row { start: 0, d1: w[1].clone(), d2: w[2].clone() });
        }
        for &z in &[4.0, 5.0] {
            let w = fornberg(z, &pts, 2);
            boundary_rows.push(Row { start: len - 6, d1: w[1].clone(), d2: w[2].clone() });
        }
        // reflected centered rows at nodes 0 and 1: ghost node -k maps onto k
        let mut reflected_rows: [Vec<(usize, f64, f64)>; 2] = [Vec::new(), Vec::new()];
        for (i, row) in reflected_rows.iter_mut().enumerate() {
            let mut acc = [(0.0f64, 0.0f64); 5];
            for (k, (&w1, &w2)) in C1.iter().zip(C2.iter()).enumerate() {
                let j = i as isize + k as isize - 2;
                let j = j.unsigned_abs();
                acc[j].0 += w1;
                acc[j].1 += w2;
            }
            *row = acc.iter().enumerate().map(|(j, &(a, b))| (j, a, b)).collect();
        }
        Self { len, boundary_rows, reflected_rows }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// First and second derivatives (unit spacing) of `f`.
    pub fn apply(&self, f: &[f64], inner: InnerBoundary) -> (Vec<f64>, Vec<f64>) {
        let n = self.len;
        debug_assert_eq!(f.len(), n);
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 2..n - 2 {
            let s = &f[i - 2..i + 3];
            d1[i] = C1[0] * s[0] + C1[1] * s[1] + C1[3] * s[3] + C1[4] * s[4];
            d2[i] = C2[0] * s[0] + C2[1] * s[1] + C2[2] * s[2] + C2[3] * s[3] + C2[4] * s[4];
        }
        match inner {
            InnerBoundary::OneSided => {
                for (i, row) in self.boundary_rows[..2].iter().enumerate() {
                    (d1[i], d2[i]) = row_apply(row, f);
                }
            }
            InnerBoundary::EvenReflection => {
                for (i, row) in self.reflected_rows.iter().enumerate() {
                    let (mut a, mut b) = (0.0, 0.0);
                    for &(j, w1, w2) in row {
                        a += w1 * f[j];
                        b += w2 * f[j];
                    }
                    d1[i] = a;
                    d2[i] = b;
                }
            }
        }
        for (k, row) in self.boundary_rows[2..].iter().enumerate() {
            let i = n - 2 + k;
            (d1[i], d2[i]) = row_apply(row, f);
        }
        (d1, d2)
    }
}

fn row_apply(row: &Row, f: &[f64]) -> (f64, f64) {
    let s = &f[row.start..row.start + row.d1.len()];
    let d1 = row.d1.iter().zip(s).map(|(w, v)| w * v).sum();
    let d2 = row.d2.iter().zip(s).map(|(w, v)| w * v).sum();
    (d1, d2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fornberg_reproduces_centered_weights() {
        let x = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fornberg(0.0, &x, 2);
        for j in 0..5 {
            assert!((w[1][j] - C1[j]).abs() < 1e-14);
            assert!((w[2][j] - C2[j]).abs() < 1e-14);
        }
        assert!((w[0][2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stencil_is_exact_on_quartics() {
        let n = 20;
        let st = UniformStencil::new(n);
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64;
                0.3 * x.powi(4) - x.powi(3) + 2.0 * x
            })
            .collect();
        let (d1, d2) = st.apply(&f, InnerBoundary::OneSided);
        for i in 0..n {
            let x = i as f64;
            let e1 = 1.2 * x.powi(3) - 3.0 * x * x + 2.0;
            let e2 = 3.6 * x * x - 6.0 * x;
            assert!((d1[i] - e1).abs() < 1e-8 * (1.0 + e1.abs()), "d1 node {i}");
            assert!((d2[i] - e2).abs() < 1e-8 * (1.0 + e2.abs()), "d2 node {i}");
        }
    }

    #[test]
    fn reflection_matches_even_function() {
        let n = 12;
        let st = UniformStencil::new(n);
        let f: Vec<f64> = (0..n).map(|i| (0.1 * i as f64).cos()).collect();
        let (d1, d2) = st.apply(&f, InnerBoundary::EvenReflection);
        assert!(d1[0].abs() < 1e-15);
        assert!((d2[0] + 0.01).abs() < 1e-7);
        assert!((d1[1] + 0.1 * 0.1f64.sin()).abs() < 1e-7);
    }
}

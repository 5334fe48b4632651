//! Smooth functions of the arclength `s` on `[0, L]`, stored by their values
//! on a Chebyshev–Lobatto grid.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::Coeff;

/// Default node count for [`SFun`] grids.
pub const DEFAULT_NODES: usize = 129;

/// Chebyshev–Lobatto grid on `[0, L]`, nodes in ascending `s`.
pub struct ChebGrid {
    degree: usize,
    length: f64,
    nodes: Vec<f64>,
    cos_table: Vec<f64>,
    diff: OnceLock<DMatrix<f64>>,
}

impl fmt::Debug for ChebGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChebGrid")
            .field("nodes", &self.nodes.len())
            .field("length", &self.length)
            .finish()
    }
}

impl ChebGrid {
    /// Grid with `nodes` points (at least 3) on `[0, length]`.
    pub fn new(nodes: usize, length: f64) -> Arc<Self> {
        assert!(nodes >= 3, "a Chebyshev grid needs at least 3 nodes");
        assert!(length > 0.0 && length.is_finite(), "grid length must be positive");
        let degree = nodes - 1;
        let pi = std::f64::consts::PI;
        let cos_table: Vec<f64> = (0..2 * degree)
            .map(|m| (pi * m as f64 / degree as f64).cos())
            .collect();
        let nodes = (0..=degree)
            .map(|j| 0.5 * length * (1.0 - cos_table[j]))
            .collect();
        Arc::new(Self {
            degree,
            length,
            nodes,
            cos_table,
            diff: OnceLock::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn cos_jk(&self, j: usize, k: usize) -> f64 {
        self.cos_table[(j * k) % (2 * self.degree)]
    }

    /// Chebyshev coefficients `a_k` with `f = Σ a_k T_k(x)`, `x = 1 − 2s/L`.
    pub fn coefficients(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = self.degree;
        (0..=n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    let w = if j == 0 || j == n { 0.5 } else { 1.0 };
                    acc += v * (w * self.cos_jk(j, k));
                }
                let ck = if k == 0 || k == n { 1.0 } else { 2.0 };
                acc * (ck / n as f64)
            })
            .collect()
    }

    /// Inverse of [`ChebGrid::coefficients`].
    pub fn values_from_coefficients(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        (0..=self.degree)
            .map(|j| {
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * self.cos_jk(j, k))
                    .sum()
            })
            .collect()
    }

    /// Differentiation matrix in `s` (collocation form).
    pub fn diff_matrix(&self) -> &DMatrix<f64> {
        self.diff.get_or_init(|| {
            let n = self.degree;
            let x: Vec<f64> = (0..=n).map(|j| self.cos_table[j]).collect();
            let c = |i: usize| if i == 0 || i == n { 2.0 } else { 1.0 };
            let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
            for i in 0..=n {
                let mut row = 0.0;
                for j in 0..=n {
                    if i != j {
                        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                        let v = c(i) / c(j) * sign / (x[i] - x[j]);
                        d[(i, j)] = v;
                        row += v;
                    }
                }
                d[(i, i)] = -row;
            }
            d * (-2.0 / self.length)
        })
    }

    fn same_as(&self, other: &ChebGrid) -> bool {
        self.degree == other.degree && self.length == other.length
    }
}

/// Function of `s ∈ [0, L]` sampled on a shared Chebyshev grid.
#[derive(Clone)]
pub struct SFun {
    grid: Arc<ChebGrid>,
    values: Vec<Complex64>,
}

impl fmt::Debug for SFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SFun(n={}, L={}, |f|max={:.3e})",
            self.values.len(),
            self.grid.length,
            self.max_abs()
        )
    }
}

impl PartialEq for SFun {
    fn eq(&self, other: &Self) -> bool {
        self.grid.same_as(&other.grid) && self.values == other.values
    }
}

impl SFun {
    pub fn from_values(grid: Arc<ChebGrid>, values: Vec<Complex64>) -> Self {
        assert_eq!(grid.len(), values.len(), "value count must match the grid");
        Self { grid, values }
    }

    pub fn from_fn(grid: &Arc<ChebGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes.iter().map(|&s| f(s)).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn from_real_fn(grid: &Arc<ChebGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |s| Complex64::new(f(s), 0.0))
    }

    pub fn constant(grid: &Arc<ChebGrid>, c: Complex64) -> Self {
        Self { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> &Arc<ChebGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn length(&self) -> f64 {
        self.grid.length
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert!(self.grid.same_as(&other.grid), "SFun grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn re(&self) -> Self {
        self.map(|v| Complex64::new(v.re, 0.0))
    }

    pub fn im(&self) -> Self {
        self.map(|v| Complex64::new(v.im, 0.0))
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Barycentric interpolation; exact at the nodes.
    pub fn eval(&self, s: f64) -> Complex64 {
        let n = self.grid.degree;
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for (j, (&sj, &v)) in self.grid.nodes.iter().zip(&self.values).enumerate() {
            let d = s - sj;
            if d == 0.0 {
                return v;
            }
            let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == n {
                w *= 0.5;
            }
            num += v * (w / d);
            den += w / d;
        }
        num / den
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.grid.coefficients(&self.values)
    }

    /// Derivative in `s`, computed through the Chebyshev coefficient recurrence.
    ///
    /// The coefficient tail below `1e-15` of the largest coefficient is dropped
    /// first, so roundoff in resolved functions is not amplified by `k²`.
    pub fn derivative(&self) -> Self {
        let mut a = self.coefficients();
        let amax = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = a.iter().rposition(|c| c.norm() > 1e-15 * amax).map_or(0, |k| k + 1);
        for c in &mut a[cut..] {
            *c = Complex64::new(0.0, 0.0);
        }
        let n = self.grid.degree;
        let mut b = vec![Complex64::new(0.0, 0.0); n + 2];
        for k in (1..=n).rev() {
            b[k - 1] = b[k + 1] + a[k] * (2.0 * k as f64);
        }
        b[0] *= 0.5;
        b.truncate(n + 1);
        let scale = -2.0 / self.grid.length;
        let values = self
            .grid
            .values_from_coefficients(&b)
            .into_iter()
            .map(|v| v * scale)
            .collect();
        Self { grid: self.grid.clone(), values }
    }

    /// Cumulative integral `∫_0^s f`.
    pub fn integral(&self) -> Self {
        let a = self.coefficients();
        let n = self.grid.degree;
        let zero = Complex64::new(0.0, 0.0);
        let at = |k: usize| if k <= n { a[k] } else { zero };
        let mut c = vec![zero; n + 1];
        if n >= 1 {
            c[1] = a[0] - at(2) * 0.5;
        }
        for k in 2..=n {
            c[k] = (at(k - 1) - at(k + 1)) / (2.0 * k as f64);
        }
        let at_start: Complex64 = c.iter().sum();
        let scale = -0.5 * self.grid.length;
        let values = self
            .grid
            .values_from_coefficients(&c)
            .into_iter()
            .map(|v| (v - at_start) * scale)
            .collect();
        Self { grid: self.grid.clone(), values }
    }

    /// `∫_0^L f` by Clenshaw–Curtis quadrature.
    pub fn definite_integral(&self) -> Complex64 {
        let a = self.coefficients();
        let sum: Complex64 = a
            .iter()
            .enumerate()
            .filter(|(k, _)| k % 2 == 0)
            .map(|(k, ak)| ak * (2.0 / (1.0 - (k * k) as f64)))
            .sum();
        sum * (0.5 * self.grid.length)
    }

    pub fn mean(&self) -> Complex64 {
        self.definite_integral() / self.grid.length
    }

    pub fn first(&self) -> Complex64 {
        self.values[0]
    }

    pub fn last(&self) -> Complex64 {
        *self.values.last().expect("grid is nonempty")
    }

    /// Whether the function is constant to within `tol`.
    pub fn is_constant(&self, tol: f64) -> bool {
        let v0 = self.values[0];
        self.values.iter().all(|v| (v - v0).norm() <= tol)
    }

    /// Resample onto another grid by barycentric interpolation.
    pub fn resample(&self, grid: &Arc<ChebGrid>) -> Self {
        Self::from_fn(grid, |s| self.eval(s))
    }
}

impl Coeff for SFun {
    fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a + b)
    }
    fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a - b)
    }
    fn mul(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a * b)
    }
    fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }
    fn magnitude(&self) -> f64 {
        self.max_abs()
    }
    fn conj(&self) -> Self {
        SFun::conj(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn nodes_reproduce_values_exactly() {
        let g = ChebGrid::new(DEFAULT_NODES, 2.0);
        let f = SFun::from_real_fn(&g, |s| (3.0 * s).sin() + s * s);
        for (&s, &v) in g.nodes().iter().zip(f.values()) {
            assert_eq!(f.eval(s), v);
        }
        let mid = f.eval(0.123);
        assert!((mid.re - ((0.369f64).sin() + 0.123 * 0.123)).abs() < 1e-13);
    }

    #[test]
    fn derivative_then_integral_recovers_function() {
        let g = ChebGrid::new(DEFAULT_NODES, 2.0);
        let f = SFun::from_fn(&g, |s| Complex64::new((2.0 * s).cos() * (0.3 * s).exp(), 1.0 / (1.0 + s * s)));
        let back = f.derivative().integral();
        let f0 = f.first();
        for (b, v) in back.values().iter().zip(f.values()) {
            assert!((b - (v - f0)).norm() < 1e-10, "{b} vs {}", v - f0);
        }
    }

    #[test]
    fn derivative_matches_analytic() {
        let g = ChebGrid::new(DEFAULT_NODES, 3.0);
        let f = SFun::from_real_fn(&g, |s| (1.7 * s).sin());
        let d = f.derivative();
        for (&s, v) in g.nodes().iter().zip(d.values()) {
            assert!((v.re - 1.7 * (1.7 * s).cos()).abs() < 1e-11);
        }
        let dm = g.diff_matrix();
        let fv: Vec<f64> = f.values().iter().map(|v| v.re).collect();
        for (i, &s) in g.nodes().iter().enumerate() {
            let row: f64 = (0..g.len()).map(|j| dm[(i, j)] * fv[j]).sum();
            assert!((row - 1.7 * (1.7 * s).cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn quadrature_and_mean() {
        let l = 2.0;
        let g = ChebGrid::new(DEFAULT_NODES, l);
        let pi = std::f64::consts::PI;
        let f = SFun::from_real_fn(&g, |s| (pi * s / l).sin().powi(2));
        assert!((f.mean() - c(0.5)).norm() < 1e-14);
        let e = SFun::from_real_fn(&g, |s| s.exp());
        assert!((e.definite_integral().re - (l.exp() - 1.0)).abs() < 1e-13);
    }
}

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bessel::bessel_j_all;
use crate::domain::BoundaryCurve;
use crate::error::{Error, Result};

/// Parity class under `x ↦ −x` (first letter) and `y ↦ −y` (second).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SymClass {
    EE,
    OE,
    EO,
    OO,
}

impl SymClass {
    pub const ALL: [SymClass; 4] = [SymClass::EE, SymClass::OE, SymClass::EO, SymClass::OO];

    /// Angular factors `cos nθ` / `sin nθ` spanning the class, up to order `nmax`.
    fn orders(self, nmax: usize) -> impl Iterator<Item = (usize, bool)> {
        let (first, cos) = match self {
            SymClass::EE => (0, true),
            SymClass::OE => (1, true),
            SymClass::EO => (1, false),
            SymClass::OO => (2, false),
        };
        (first..=nmax).step_by(2).map(move |n| (n, cos))
    }

    pub fn label(self) -> &'static str {
        match self {
            SymClass::EE => "EE",
            SymClass::OE => "OE",
            SymClass::EO => "EO",
            SymClass::OO => "OO",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MpsOptions {
    /// Scan step in `k`.
    pub step: f64,
    /// Highest Bessel order is `factor·k·r_max + extra`.
    pub basis_factor: f64,
    pub basis_extra: usize,
    /// Width of the `k` windows sharing one basis size.
    pub window: f64,
    /// Tension accepted as an eigenvalue.
    pub tol: f64,
}

impl Default for MpsOptions {
    fn default() -> Self {
        Self { step: 0.01, basis_factor: 1.0, basis_extra: 16, window: 2.0, tol: 1e-8 }
    }
}

impl MpsOptions {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.window > 4.0 * self.step && self.basis_factor > 0.0 && self.tol > 0.0) {
            return Err(Error::InvalidInput("MPS options: need step > 0, window > 4·step, positive factor and tol".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    /// Eigenvalue `λ = k²` of `−Δ`.
    pub lambda: f64,
    /// Frequency `k`.
    pub k: f64,
    pub class: SymClass,
    /// Subspace-angle tension at `k`.
    pub residual: f64,
}

/// Dirichlet eigenvalues sorted ascending.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Eigenvalue>,
}

impl Spectrum {
    pub fn new(mut eigenvalues: Vec<Eigenvalue>) -> Self {
        eigenvalues.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
        Self { eigenvalues }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.k).collect()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.lambda).collect()
    }

    pub fn class(&self, class: SymClass) -> Vec<f64> {
        self.eigenvalues.iter().filter(|e| e.class == class).map(|e| e.lambda).collect()
    }

    /// Number of eigenvalues `λ ≤ lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        self.eigenvalues.iter().filter(|e| e.lambda <= lambda).count()
    }

    pub fn max_residual(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e.residual).fold(0.0, f64::max)
    }
}

/// Collocation geometry for one symmetry class: points in the closed first
/// quadrant in polar form.
struct Points {
    boundary: Vec<(f64, f64)>,
    interior: Vec<(f64, f64)>,
}

fn polar(p: [f64; 2]) -> (f64, f64) {
    (p[0].hypot(p[1]), p[1].atan2(p[0]))
}

impl Points {
    fn new(curve: &dyn BoundaryCurve, n_basis: usize) -> Self {
        let nb = 2 * n_basis + 10;
        let boundary = (0..nb).map(|j| polar(curve.point(0.25 * (j as f64 + 0.5) / nb as f64).pos)).collect();
        // interior points along rays, radii from a golden-ratio sequence
        let ni = n_basis.max(8);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        let interior = (0..ni)
            .map(|j| {
                let t = 0.25 * (j as f64 + 0.5) / ni as f64;
                let rho = 0.2 + 0.7 * ((j as f64 + 1.0) * phi).fract();
                let (r, th) = polar(curve.point(t).pos);
                (rho * r, th)
            })
            .collect();
        Self { boundary, interior }
    }
}

/// The subspace-angle tension `σ_min(U_B)` of the Fourier–Bessel basis at `k`,
/// with the second smallest value.
struct Tension<'a> {
    class: SymClass,
    nmax: usize,
    points: &'a Points,
}

impl Tension<'_> {
    fn eval(&self, k: f64) -> (f64, f64) {
        let orders: Vec<(usize, bool)> = self.class.orders(self.nmax).collect();
        let (nb, ni) = (self.points.boundary.len(), self.points.interior.len());
        let mut a = DMatrix::<f64>::zeros(nb + ni, orders.len());
        let mut j = Vec::new();
        for (row, &(r, th)) in self.points.boundary.iter().chain(&self.points.interior).enumerate() {
            bessel_j_all(self.nmax, k * r, &mut j);
            for (col, &(n, cos)) in orders.iter().enumerate() {
                let ang = if cos { (n as f64 * th).cos() } else { (n as f64 * th).sin() };
                a[(row, col)] = j[n] * ang;
            }
        }
        for mut c in a.column_iter_mut() {
            let norm = c.norm();
            if norm > 0.0 {
                c /= norm;
            }
        }
        let svd = a.svd(true, false);
        let u = svd.u.expect("requested U");
        let smax = svd.singular_values.max();
        let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-14 * smax).collect();
        if keep.is_empty() {
            // every basis function vanishes at the points (k = 0)
            return (1.0, 1.0);
        }
        let ub = DMatrix::from_fn(nb, keep.len(), |i, c| u[(i, keep[c])]);
        let mut s: Vec<f64> = ub.singular_values().iter().copied().collect();
        s.sort_by(f64::total_cmp);
        (s[0], s.get(1).copied().unwrap_or(1.0))
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Local minima of sampled values, as index triples.
fn sample_minima(v: &[f64]) -> Vec<usize> {
    (1..v.len().saturating_sub(1)).filter(|&i| v[i] < v[i - 1] && v[i] <= v[i + 1]).collect()
}

/// Eigenvalues of one class with `k ∈ [k_lo, k_hi)`.
fn scan_window(curve: &dyn BoundaryCurve, class: SymClass, k_lo: f64, k_hi: f64, opts: &MpsOptions) -> Result<Vec<Eigenvalue>> {
    let rmax = curve.max_radius();
    let nmax = (opts.basis_factor * k_hi * rmax).ceil() as usize + opts.basis_extra;
    let n_basis = class.orders(nmax).count();
    let points = Points::new(curve, n_basis);
    let t = Tension { class, nmax, points: &points };
    let h = opts.step;
    let steps = ((k_hi - k_lo) / h).ceil() as usize;
    let ks: Vec<f64> = (0..=steps + 2).map(|i| k_lo - h + i as f64 * h).collect();
    let vals: Vec<(f64, f64)> = ks.iter().map(|&k| t.eval(k)).collect();
    let s1: Vec<f64> = vals.iter().map(|v| v.0).collect();

    let tol = |b: f64| 1e-13 * b.abs().max(1.0);
    // (k, residual, second root of a numerically degenerate pair)
    let mut found: Vec<(f64, f64, bool)> = Vec::new();
    for i in sample_minima(&s1) {
        let (k1, r1) = golden_min(|k| t.eval(k).0, ks[i - 1], ks[i + 1], tol(ks[i + 1]));
        found.push((k1, r1, false));
        // A partner closer than a few steps hides inside the same sampled
        // dip. Near two roots the two smallest singular values follow the two
        // branches, so σ₂ is smallest where they cross, and past the crossing
        // σ₁ dips once more to the partner.
        let slope = s1[i - 1].max(s1[i + 1]);
        let s2 = t.eval(k1).1;
        if s2 < opts.tol {
            found.push((k1, s2, true));
            continue;
        }
        if s2 > 4.0 * slope {
            continue;
        }
        // σ₂(k₁) ≈ c·gap with c ≈ slope/h, which sizes the bracket
        let reach = (3.0 * s2 / slope * h).min(4.0 * h);
        let (lo, hi) = (k1 - reach, k1 + reach);
        let (kx, _) = golden_min(|k| t.eval(k).1, lo, hi, tol(hi));
        let (a, b) = if kx > k1 { (kx, hi) } else { (lo, kx) };
        let (k2, r2) = golden_min(|k| t.eval(k).0, a, b, tol(b));
        if (k2 - k1).abs() > 1e-9 * k1 && (k2 - a).abs() > 1e-9 * k1 && (b - k2).abs() > 1e-9 * k1 {
            found.push((k2, r2, false));
        }
    }
    let mut out = Vec::new();
    for (k, r, degenerate) in found {
        if !(k >= k_lo && k < k_hi) || r > 1e-4 {
            continue;
        }
        if r > opts.tol {
            return Err(Error::IllConditioned(r));
        }
        if !degenerate && out.iter().any(|e: &Eigenvalue| (e.k - k).abs() < 1e-9 * k) {
            continue;
        }
        out.push(Eigenvalue { lambda: k * k, k, class, residual: r });
    }
    out.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(out)
}

fn check_symmetric(curve: &dyn BoundaryCurve) -> Result<()> {
    let s = curve.symmetry();
    if !(s.up_down && s.left_right) {
        return Err(Error::InvalidInput("eigensolver needs a curve symmetric in both axes".into()));
    }
    Ok(())
}

/// All eigenvalues of one symmetry class with frequency below `k_max`.
pub fn class_eigs_below(curve: &dyn BoundaryCurve, class: SymClass, k_max: f64, opts: &MpsOptions) -> Result<Vec<Eigenvalue>> {
    check_symmetric(curve)?;
    opts.validate()?;
    let mut out = Vec::new();
    let mut lo = opts.step;
    while lo < k_max {
        let hi = (lo + opts.window).min(k_max);
        out.extend(scan_window(curve, class, lo, hi, opts)?);
        lo = hi;
    }
    out.sort_by(|a, b| a.k.total_cmp(&b.k));
    Ok(out)
}

/// The lowest `count` eigenvalues of one symmetry class.
pub fn dirichlet_eigs(curve: &dyn BoundaryCurve, class: SymClass, count: usize, opts: &MpsOptions) -> Result<Spectrum> {
    check_symmetric(curve)?;
    opts.validate()?;
    let mut out = Vec::new();
    let mut lo = opts.step;
    while out.len() < count {
        let hi = lo + opts.window;
        out.extend(scan_window(curve, class, lo, hi, opts)?);
        lo = hi;
        if lo > 1e4 {
            return Err(Error::NoConvergence("eigenvalue scan ran past k = 1e4".into()));
        }
    }
    out.sort_by(|a, b| a.k.total_cmp(&b.k));
    out.truncate(count);
    Ok(Spectrum::new(out))
}

/// Every eigenvalue with frequency below `k_max`, all classes (in parallel).
pub fn spectrum_below(curve: &dyn BoundaryCurve, k_max: f64, opts: &MpsOptions) -> Result<Spectrum> {
    let parts = SymClass::ALL
        .par_iter()
        .map(|&c| class_eigs_below(curve, c, k_max, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(Spectrum::new(parts.into_iter().flatten().collect()))
}

/// Exact spectrum of the square `[−a/2, a/2]²`: `π²(m² + n²)/a²`, lowest `count`.
pub fn square_eigs(side: f64, count: usize) -> Spectrum {
    let mut v = Vec::new();
    let mut m_max: usize = 1;
    // enough modes to contain the lowest `count`
    while (m_max * m_max) as f64 * PI / 4.0 < 2.0 * count as f64 + 16.0 {
        m_max += 1;
    }
    for m in 1..=m_max {
        for n in 1..=m_max {
            let lambda = PI * PI * ((m * m + n * n) as f64) / (side * side);
            // sin(mπ(x + a/2)/a) is even in x for odd m
            let class = match (m % 2 == 1, n % 2 == 1) {
                (true, true) => SymClass::EE,
                (false, true) => SymClass::OE,
                (true, false) => SymClass::EO,
                (false, false) => SymClass::OO,
            };
            v.push(Eigenvalue { lambda, k: lambda.sqrt(), class, residual: 0.0 });
        }
    }
    let mut s = Spectrum::new(v);
    s.eigenvalues.truncate(count);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Ellipse;

    /// Bessel oracle independent of the recurrence: trapezoid rule on
    /// `(1/π)∫₀^π cos(nτ − x sin τ)dτ`, zeros by bisection.
    fn j_int(n: usize, x: f64) -> f64 {
        let m = 600;
        let h = PI / m as f64;
        let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
        let mut s = 0.5 * (f(0.0) + f(PI));
        for i in 1..m {
            s += f(i as f64 * h);
        }
        s * h / PI
    }

    fn bessel_zeros(n: usize, below: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let h = 0.05;
        let mut x = n as f64 * 0.5 + 0.01;
        let mut fx = j_int(n, x);
        while x < below {
            let y = x + h;
            let fy = j_int(n, y);
            if fx * fy < 0.0 {
                let (mut a, mut b, mut fa) = (x, y, fx);
                for _ in 0..60 {
                    let c = 0.5 * (a + b);
                    let fc = j_int(n, c);
                    if (fc < 0.0) == (fa < 0.0) {
                        a = c;
                        fa = fc;
                    } else {
                        b = c;
                    }
                }
                out.push(0.5 * (a + b));
            }
            x = y;
            fx = fy;
        }
        out
    }

    fn disk_class(class: SymClass, count: usize) -> Vec<f64> {
        let below = 40.0;
        let mut v: Vec<f64> = class.orders(60).flat_map(|(n, _)| bessel_zeros(n, below)).map(|z| z * z).collect();
        v.sort_by(f64::total_cmp);
        v.truncate(count);
        v
    }

    #[test]
    fn disk_ground_state() {
        let disk = Ellipse::circle(1.0);
        let s = dirichlet_eigs(&disk, SymClass::EE, 1, &MpsOptions::default()).unwrap();
        assert!((s.eigenvalues[0].lambda - 5.783185962946784).abs() < 1e-8);
        assert!(s.eigenvalues[0].residual < 1e-8);
    }

    #[test]
    fn disk_classes_match_bessel_zeros() {
        let disk = Ellipse::circle(1.0);
        for class in [SymClass::OE, SymClass::OO] {
            let s = dirichlet_eigs(&disk, class, 8, &MpsOptions::default()).unwrap();
            let oracle = disk_class(class, 8);
            for (e, o) in s.eigenvalues.iter().zip(&oracle) {
                assert!(((e.lambda - o) / o).abs() < 1e-6, "{class:?}: {} vs {o}", e.lambda);
                assert!(e.residual < 1e-8);
            }
        }
    }

    #[test]
    fn square_closed_form() {
        let s = square_eigs(1.0, 10);
        assert!((s.eigenvalues[0].lambda - 2.0 * PI * PI).abs() < 1e-12);
        assert_eq!(s.eigenvalues[0].class, SymClass::EE);
        assert!((s.eigenvalues[1].lambda - 5.0 * PI * PI).abs() < 1e-12);
        assert!(s.eigenvalues.windows(2).all(|w| w[0].lambda <= w[1].lambda));
        assert_eq!(square_eigs(1.0, 500).len(), 500);
    }

    #[test]
    fn ellipse_is_stable_under_basis_doubling() {
        let e = Ellipse::new(1.0, 0.75).unwrap();
        let opts = MpsOptions::default();
        let base = class_eigs_below(&e, SymClass::EE, 12.0, &opts).unwrap();
        let doubled = MpsOptions { basis_factor: 2.0 * opts.basis_factor, basis_extra: 2 * opts.basis_extra, ..opts };
        let twice = class_eigs_below(&e, SymClass::EE, 12.0, &doubled).unwrap();
        assert_eq!(base.len(), twice.len());
        assert!(base.len() >= 5);
        for (a, b) in base.iter().zip(&twice) {
            assert!(((a.lambda - b.lambda) / a.lambda).abs() < 1e-6, "{} vs {}", a.lambda, b.lambda);
        }
    }

    #[test]
    fn close_pairs_are_resolved() {
        // this ellipse has OO pairs 2e-4 and 1.4e-2 apart near k = 49 and 47.8
        let e = Ellipse::new(1.0, 0.75).unwrap();
        let coarse = scan_window(&e, SymClass::OO, 47.5, 49.5, &MpsOptions::default()).unwrap();
        let fine_opts = MpsOptions { step: 0.002, basis_extra: 32, ..MpsOptions::default() };
        let fine = scan_window(&e, SymClass::OO, 47.5, 49.5, &fine_opts).unwrap();
        assert_eq!(coarse.len(), fine.len());
        for (a, b) in coarse.iter().zip(&fine) {
            assert!((a.k - b.k).abs() < 1e-9 * a.k, "{} vs {}", a.k, b.k);
        }
        let gaps: Vec<f64> = fine.windows(2).map(|w| w[1].k - w[0].k).collect();
        assert!(gaps.iter().any(|&g| g < 1e-3), "{gaps:?}");
    }

    #[test]
    fn bad_options_are_rejected() {
        let disk = Ellipse::circle(1.0);
        let opts = MpsOptions { step: 0.0, ..MpsOptions::default() };
        assert!(matches!(dirichlet_eigs(&disk, SymClass::EE, 1, &opts), Err(Error::InvalidInput(_))));
    }
}

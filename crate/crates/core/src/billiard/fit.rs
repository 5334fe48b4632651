use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{numeric_poincare, BilliardState, PeriodicOrbit, Table};
use crate::domain::{BoundaryCurve, OrbitClass};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitOptions {
    pub iterations: usize,
    /// Polynomial degree of `ω(I)`.
    pub degree: usize,
    /// Reject `α` within `1e-6` of `2πj/k` for `k` up to this order.
    pub resonance_order: u32,
    /// Allowed gap between the rotation numbers from `N` and `N/2` iterates.
    pub chaos_tol: f64,
    /// Finite-difference step for the linearization.
    pub h: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { iterations: 10_000, degree: 3, resonance_order: 4, chaos_tol: 1e-8, h: 1e-4 }
    }
}

/// Rotation number measured on one invariant circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSample {
    pub radius: f64,
    pub action: f64,
    pub rotation: f64,
    pub rotation_half: f64,
    pub fitted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffFit {
    /// Rotation angle of the numeric linearization.
    pub alpha: f64,
    /// Least-squares coefficients of `ω(I) = b₀ + b₁I + …`.
    pub b: Vec<f64>,
    pub samples: Vec<RotationSample>,
    /// RMS of the polynomial fit.
    pub residual: f64,
}

fn bump(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        (-1.0 / (x * (1.0 - x))).exp()
    }
}

/// Weighted Birkhoff average of the angle increments.
fn weighted_average(incr: &[f64]) -> f64 {
    let n = incr.len() as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, &v) in incr.iter().enumerate() {
        let w = bump((k as f64 + 0.5) / n);
        num += w * v;
        den += w;
    }
    num / den
}

/// Estimates `b₀, b₁, …` of the reduced map at a bouncing-ball orbit from
/// rotation numbers of invariant circles.
///
/// Each circle is seeded at `q₁ = ρ` in the linear normal coordinate `q₁` of
/// the numeric Jacobian; its action is the enclosed area in `(σ, p)` over `2π`.
pub fn fit_birkhoff(table: &Table, orbit: &PeriodicOrbit, radii: &[f64], opts: &FitOptions) -> Result<BirkhoffFit> {
    if radii.len() <= opts.degree {
        return Err(Error::InvalidInput(format!("need more than {} radii for a degree-{} fit", opts.degree, opts.degree)));
    }
    let m = numeric_poincare(table, orbit, opts.h)?;
    let alpha = match OrbitClass::from_trace(m.trace()) {
        OrbitClass::Elliptic { alpha } => alpha,
        OrbitClass::Degenerate { .. } => return Err(Error::DegenerateOrbit),
        OrbitClass::Hyperbolic { .. } => return Err(Error::InvalidInput("orbit is hyperbolic".into())),
    };
    for k in 1..=opts.resonance_order {
        let r = k as f64 * alpha / TAU;
        if (r - r.round()).abs() < 1e-6 {
            return Err(Error::LowOrderResonance { k });
        }
    }

    // left eigenvector for e^{iα}
    let lam = Complex64::from_polar(1.0, alpha);
    let mut w = if m[(1, 0)].abs() >= m[(0, 1)].abs() {
        [Complex64::new(m[(1, 0)], 0.0), lam - m[(0, 0)]]
    } else {
        [lam - m[(1, 1)], Complex64::new(m[(0, 1)], 0.0)]
    };
    let im2 = 2.0 * (w[0] * w[1].conj()).im;
    for c in &mut w {
        *c /= im2.abs().sqrt();
    }

    let base = orbit.base_state();
    let red = orbit.reduction();
    let speed = table.curve().point(base.t).speed();
    let det = w[0].re * w[1].im - w[1].re * w[0].im;

    let measure = |rho: f64| -> Result<RotationSample> {
        // real (σ, p) with w·(σ, p) = ρ
        let sigma = rho * w[1].im / det;
        let p = -rho * w[0].im / det;
        let mut s = BilliardState::new(base.t + sigma / speed, p);
        let n = opts.iterations;
        let mut pts = Vec::with_capacity(n + 1);
        for i in 0..=n {
            if i > 0 {
                s = table.reduced(s, red)?;
            }
            let mut dt = s.t - base.t;
            dt -= dt.round();
            pts.push([dt * speed, s.p]);
        }
        let z: Vec<Complex64> = pts.iter().map(|q| w[0] * q[0] + w[1] * q[1]).collect();
        let incr: Vec<f64> = z.windows(2).map(|v| alpha + (v[1] / (v[0] * lam)).arg()).collect();
        let rotation = weighted_average(&incr);
        let rotation_half = weighted_average(&incr[..n / 2]);

        let mut order: Vec<(f64, [f64; 2])> = z.iter().zip(&pts).take(n).map(|(zz, q)| (zz.arg(), *q)).collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut area = 0.0;
        for i in 0..order.len() {
            let (a, b) = (order[i].1, order[(i + 1) % order.len()].1);
            area += a[0] * b[1] - a[1] * b[0];
        }
        Ok(RotationSample { radius: rho, action: 0.5 * area.abs() / (2.0 * PI), rotation, rotation_half, fitted: f64::NAN })
    };
    let mut samples = radii.par_iter().map(|&r| measure(r)).collect::<Result<Vec<_>>>()?;
    for s in &samples {
        if (s.rotation - s.rotation_half).abs() > opts.chaos_tol {
            return Err(Error::ChaoticLayer(format!(
                "rotation number at radius {} not converged: {:.3e}",
                s.radius,
                (s.rotation - s.rotation_half).abs()
            )));
        }
    }

    let deg = opts.degree;
    let a = DMatrix::from_fn(samples.len(), deg + 1, |i, j| samples[i].action.powi(j as i32));
    let y = DVector::from_iterator(samples.len(), samples.iter().map(|s| s.rotation));
    let svd = a.clone().svd(true, true);
    let b = svd.solve(&y, 1e-14).map_err(|e| Error::NoConvergence(e.to_string()))?;
    let fitted = &a * &b;
    let mut ss = 0.0;
    for (s, f) in samples.iter_mut().zip(fitted.iter()) {
        s.fitted = *f;
        ss += (s.rotation - f).powi(2);
    }
    Ok(BirkhoffFit {
        alpha,
        b: b.iter().copied().collect(),
        residual: (ss / samples.len() as f64).sqrt(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::billiard::find_bouncing_ball;
    use crate::domain::{to_curve, Axis, Curve, DomainJet, Ellipse};

    fn radii() -> Vec<f64> {
        (1..=8).map(|i| 0.005 * i as f64).collect()
    }

    #[test]
    fn weighted_average_of_quasiperiodic_signal() {
        // increments α + sin(θ₀ + kβ) average to α rapidly
        let beta = (5f64.sqrt() - 1.0) * PI;
        let v: Vec<f64> = (0..2000).map(|k| 0.3 + (1.0 + k as f64 * beta).sin()).collect();
        assert!((weighted_average(&v) - 0.3).abs() < 1e-10);
    }

    #[test]
    fn circle_is_rejected() {
        let table = Table::new(Curve::Ellipse(Ellipse::circle(1.0)));
        let o = find_bouncing_ball(&table, Axis::Vertical).unwrap();
        assert_eq!(fit_birkhoff(&table, &o, &radii(), &FitOptions::default()), Err(Error::DegenerateOrbit));
    }

    #[test]
    fn matches_series_coefficients() {
        let jet = DomainJet::new(vec![-0.2, 0.01]);
        let table = Table::new(to_curve(&jet).unwrap());
        let o = find_bouncing_ball(&table, Axis::Vertical).unwrap();
        let fit = fit_birkhoff(&table, &o, &radii(), &FitOptions::default()).unwrap();
        let b = crate::classical::forward_map(&jet, 1).unwrap();
        assert!((fit.alpha - b[0]).abs() < 1e-7);
        assert!((fit.b[0] - b[0]).abs() < 1e-7);
        assert!((fit.b[1] / b[1] - 1.0).abs() < 1e-3, "{} vs {}", fit.b[1], b[1]);
    }

    #[test]
    fn quarter_turn_is_guarded() {
        let table = Table::new(to_curve(&DomainJet::new(vec![-0.25, 0.01])).unwrap());
        let o = find_bouncing_ball(&table, Axis::Vertical).unwrap();
        assert_eq!(fit_birkhoff(&table, &o, &radii(), &FitOptions::default()), Err(Error::LowOrderResonance { k: 4 }));
    }
}

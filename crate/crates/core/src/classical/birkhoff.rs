use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TwistMapJet;
use crate::domain::OrbitClass;
use crate::error::{Error, Result};
use crate::series::{Basis, Poly2, SeriesMap};

/// Birkhoff normal form `T ~ (I, θ) ↦ (I, θ + ω(I))` with
/// `ω(I) = b₀ + b₁I + … + bₙIⁿ` (elliptic) or the hyperbolic analogue
/// `(u, v) ↦ (e^{ν(I)}u, e^{−ν(I)}v)`, `I = uv`, `ν = Σ b_k I^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BirkhoffForm {
    pub class: OrbitClass,
    pub b: Vec<f64>,
    /// Largest non-normal coefficient left in the conjugated map.
    pub residual: f64,
}

impl BirkhoffForm {
    pub fn order(&self) -> usize {
        self.b.len() - 1
    }

    /// `ω(I)` (or `ν(I)`).
    pub fn frequency(&self, action: f64) -> f64 {
        self.b.iter().rev().fold(0.0, |acc, &c| acc * action + c)
    }
}

/// Normalizes the twist map; see [`birkhoff_normalize_map`].
pub fn birkhoff_normalize(tw: &TwistMapJet) -> Result<(BirkhoffForm, SeriesMap)> {
    birkhoff_normalize_map(&tw.map)
}

/// Birkhoff normal form of a real area-preserving map jet fixing the origin.
///
/// Returns the form and the normalizing map `H` with `T ∘ H = H ∘ N`, where
/// `N` is the normal form in the complex (elliptic) or real (hyperbolic)
/// eigen-coordinates `(q₁, q₂)`.
pub fn birkhoff_normalize_map(map: &SeriesMap) -> Result<(BirkhoffForm, SeriesMap)> {
    let d = map.max_degree();
    let n = (d.saturating_sub(1) / 2) as usize;
    let m = map.linear_part().map(|r| r.map(|c| c.re));
    let trace = m[0][0] + m[1][1];
    let class = OrbitClass::from_trace(trace);
    let (lam1, lam2, w, v, omega) = match class {
        OrbitClass::Degenerate { .. } => return Err(Error::DegenerateOrbit),
        OrbitClass::Elliptic { alpha } => {
            for k in 1..=d + 1 {
                let r = k as f64 * alpha / TAU;
                if (r - r.round()).abs() < 1e-6 {
                    return Err(Error::LowOrderResonance { k });
                }
            }
            let lam = Complex64::from_polar(1.0, alpha);
            let w = left_eigenvector(&m, lam);
            let im2 = 2.0 * (w[0] * w[1].conj()).im;
            let w = w.map(|c| c / im2.abs().sqrt());
            let v = w.map(|c| c.conj());
            (lam, lam.conj(), w, v, Complex64::new(0.0, im2.signum()))
        }
        OrbitClass::Hyperbolic { .. } => {
            let disc = (trace * trace - 4.0).sqrt();
            let mu = 0.5 * (trace + trace.signum() * disc);
            let (l1, l2) = (Complex64::new(mu, 0.0), Complex64::new(1.0 / mu, 0.0));
            let w = left_eigenvector(&m, l1);
            let v = left_eigenvector(&m, l2);
            let br = w[0] * v[1] - w[1] * v[0];
            (l1, l2, w, v.map(|c| c / br), Complex64::new(1.0, 0.0))
        }
    };

    let lmat = [[w[0], w[1]], [v[0], v[1]]];
    let det = lmat[0][0] * lmat[1][1] - lmat[0][1] * lmat[1][0];
    let linv = [[lmat[1][1] / det, -lmat[0][1] / det], [-lmat[1][0] / det, lmat[0][0] / det]];
    let basis = map.basis();
    let to_q = SeriesMap::linear(basis, d, lmat);
    let from_q = SeriesMap::linear(basis, d, linv);
    let mut t = to_q.compose(&map.compose(&from_q));
    let mut h = from_q;

    for k in 2..=d {
        let t1 = t.first.homogeneous_part(k);
        let t2 = t.second.homogeneous_part(k);
        // χ has degree k + 1
        let mut chi = Poly2::new(basis, d + 1);
        for (&(a, b), &c) in t1.terms() {
            if a == b + 1 {
                continue;
            }
            let div = lam1 - lam1.powu(a) * lam2.powu(b);
            if div.norm() < 1e-12 {
                return Err(Error::LowOrderResonance { k: a.abs_diff(b + 1) });
            }
            chi.add_term(a, b + 1, -c / div / (omega * (b + 1) as f64));
        }
        let c = t2.coeff(k, 0);
        if c != Complex64::new(0.0, 0.0) {
            let div = lam2 - lam1.powu(k);
            if div.norm() < 1e-12 {
                return Err(Error::LowOrderResonance { k: k + 1 });
            }
            chi.add_term(k + 1, 0, c / div / (omega * (k + 1) as f64));
        }
        if chi.is_zero() {
            continue;
        }
        let phi = lie_exp(&chi, omega, basis, d, 1.0);
        let phi_inv = lie_exp(&chi, omega, basis, d, -1.0);
        t = phi_inv.compose(&t.compose(&phi));
        h = h.compose(&phi);
    }

    let mut residual: f64 = 0.0;
    for (&(a, b), c) in t.first.terms() {
        if a != b + 1 {
            residual = residual.max(c.norm());
        }
    }
    for (&(a, b), c) in t.second.terms() {
        if b != a + 1 {
            residual = residual.max(c.norm());
        }
    }

    // first component = λ₁ q₁ g(I), g = 1 + Σ c_j I^j
    let g: Vec<Complex64> = (0..=n as u32).map(|j| t.first.coeff(j + 1, j) / lam1).collect();
    let lg = log_series(&g);
    let b = match class {
        OrbitClass::Elliptic { alpha } => {
            std::iter::once(alpha).chain(lg.iter().skip(1).map(|c| c.im)).collect()
        }
        _ => std::iter::once(lam1.re.abs().ln()).chain(lg.iter().skip(1).map(|c| c.re)).collect(),
    };
    Ok((BirkhoffForm { class, b, residual }, h))
}

fn left_eigenvector(m: &[[f64; 2]; 2], lam: Complex64) -> [Complex64; 2] {
    // w M = λ w
    let a = [Complex64::new(m[1][0], 0.0), lam - m[0][0]];
    let b = [lam - m[1][1], Complex64::new(m[0][1], 0.0)];
    if a[0].norm() + a[1].norm() >= b[0].norm() + b[1].norm() {
        a
    } else {
        b
    }
}

/// Time-`sign` flow of the Hamiltonian `χ` as a Lie series on the coordinates.
fn lie_exp(chi: &Poly2, omega: Complex64, basis: Basis, d: u32, sign: f64) -> SeriesMap {
    let flow = |g: Poly2| {
        let mut out = g.clone();
        let mut term = g;
        for j in 1.. {
            term = term.poisson_with(chi, omega).scale(Complex64::new(sign / j as f64, 0.0));
            if term.is_zero() {
                break;
            }
            out = out.add(&term);
        }
        out
    };
    SeriesMap {
        first: flow(Poly2::coordinate(basis, d, true)),
        second: flow(Poly2::coordinate(basis, d, false)),
    }
}

/// `log g` for a power series with `g₀ = 1`, same length.
fn log_series(g: &[Complex64]) -> Vec<Complex64> {
    let n = g.len();
    let mut u = g.to_vec();
    u[0] = Complex64::new(0.0, 0.0);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut pow = u.clone();
    for k in 1..n {
        let f = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
        for i in 0..n {
            out[i] += pow[i] * f;
        }
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n - i {
                next[i + j] += pow[i] * u[j];
            }
        }
        pow = next;
    }
    out
}

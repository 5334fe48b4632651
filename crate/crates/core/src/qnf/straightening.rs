use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{Basis, ChebGrid, Poly2, SFun};

/// Transverse type of the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Elliptic,
    Hyperbolic,
}

impl Case {
    /// Complex coordinates diagonalizing `{I, ·}`.
    pub fn basis(self) -> Basis {
        match self {
            Case::Elliptic => Basis::ZZbar,
            Case::Hyperbolic => Basis::WWbar,
        }
    }

    /// `{I, u^a v^b} = factor · u^a v^b`.
    pub fn bracket_factor(self, a: u32, b: u32) -> Complex64 {
        let d = a as f64 - b as f64;
        match self {
            Case::Elliptic => Complex64::new(0.0, d),
            Case::Hyperbolic => Complex64::new(d, 0.0),
        }
    }

    /// `+1` for `y² + η²`, `−1` for the hyperbolic `y² − η²`.
    pub fn sign(self) -> f64 {
        match self {
            Case::Elliptic => 1.0,
            Case::Hyperbolic => -1.0,
        }
    }
}

/// Quadratic-order straightening of a neighborhood of the orbit segment
/// `[0, L]` between two mirrors with signed radii `R_A`, `R_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct StraighteningData {
    pub case: Case,
    pub length: f64,
    pub radius_a: f64,
    pub radius_b: f64,
    pub s0: f64,
    pub ell: f64,
    pub theta: SFun,
    /// `θ'`, in closed form.
    pub theta_prime: SFun,
    pub b00: SFun,
    pub c00: SFun,
    pub kappa22: SFun,
    /// `arctan` (or `artanh`) closed form of `∫₀ᴸ b₀₀`.
    pub alpha: f64,
}

impl StraighteningData {
    pub fn grid(&self) -> &Arc<ChebGrid> {
        self.b00.grid()
    }

    /// `α` by Clenshaw–Curtis quadrature of `b₀₀`.
    pub fn alpha_quadrature(&self) -> f64 {
        self.b00.definite_integral().re
    }

    /// `max |θ'' ∓ 1/θ³|`, with `θ''` the spectral derivative of `θ'`.
    pub fn ode_residual(&self) -> f64 {
        let tpp = self.theta_prime.derivative();
        let sign = self.case.sign();
        tpp.values()
            .iter()
            .zip(self.theta.values())
            .map(|(d2, t)| (d2.re - sign / t.re.powi(3)).abs())
            .fold(0.0, f64::max)
    }

    /// `max |b₀₀ θ² − 1|`.
    pub fn normalization_residual(&self) -> f64 {
        self.b00
            .values()
            .iter()
            .zip(self.theta.values())
            .map(|(b, t)| (b.re * t.re * t.re - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `Φ(s) = ∫₀ˢ b₀₀ − (α/L)s`, vanishing at both ends.
    pub fn phase(&self) -> SFun {
        let slope = self.alpha_quadrature() / self.length;
        let int = self.b00.integral();
        int.zip(&SFun::from_real_fn(self.grid(), |s| slope * s), |a, b| a - b)
    }
}

/// Solves for `s₀` and `ℓ` and fills the profiles on `nodes` Chebyshev nodes.
///
/// Elliptic: `ℓ² = s₀(R_A − s₀) = (L − s₀)(R_B − L + s₀)`, `θ² = ℓ + u²/ℓ`.
/// Hyperbolic: `ℓ² = s₀(s₀ − R_A) = (L − s₀)(L − s₀ − R_B)`, `θ² = ℓ − u²/ℓ`.
/// Here `u = s − s₀` and radii are positive for mirrors focusing toward the
/// orbit.
pub fn solve_straightening(radius_a: f64, radius_b: f64, length: f64, case: Case, nodes: usize) -> Result<StraighteningData> {
    if !(length > 0.0) || !radius_a.is_finite() || !radius_b.is_finite() {
        return Err(Error::InvalidInput("need L > 0 and finite radii".into()));
    }
    let sign = case.sign();
    let left = |s: f64| sign * s * (radius_a - s);
    let right = |s: f64| sign * (length - s) * (radius_b - length + s);
    let h = |s: f64| left(s) - right(s);

    // bisection on the difference of the two radicands over [0, L]
    let (mut lo, mut hi) = (0.0, length);
    let (hlo, hhi) = (h(lo), h(hi));
    let scale = length * (radius_a.abs() + radius_b.abs() + length);
    let s0 = if hlo.abs() <= 1e-14 * scale && hhi.abs() <= 1e-14 * scale {
        // R_A = R_B = L: the radicands agree for every s₀; the mirror symmetry picks the midpoint
        0.5 * length
    } else {
        if hlo * hhi > 0.0 {
            return Err(Error::NoAdmissibleRoot("radicands never agree on [0, L]".into()));
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if (h(mid) < 0.0) == (hlo < 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-16 * length {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let ell2 = left(s0);
    if !(ell2 > 0.0) || !(s0 > 0.0 && s0 < length) {
        return Err(Error::NoAdmissibleRoot(format!("ℓ² = {ell2:.3e} at s₀ = {s0:.6}")));
    }
    let ell = ell2.sqrt();

    let grid = ChebGrid::new(nodes, length);
    let theta2 = |s: f64| ell + sign * (s - s0).powi(2) / ell;
    for &s in grid.nodes() {
        if !(theta2(s) > 0.0) {
            return Err(Error::NoAdmissibleRoot(format!("θ² ≤ 0 at s = {s:.6}")));
        }
    }
    let theta = SFun::from_real_fn(&grid, |s| theta2(s).sqrt());
    let theta_prime = SFun::from_real_fn(&grid, |s| sign * (s - s0) / (ell * theta2(s).sqrt()));
    let b00 = SFun::from_real_fn(&grid, |s| 1.0 / theta2(s));
    let c00 = SFun::from_real_fn(&grid, |s| sign * (s - s0) / ell / theta2(s));
    let kappa22 = c00.map(|v| v * 0.5);
    let alpha = match case {
        Case::Elliptic => (s0 / ell).atan() + ((length - s0) / ell).atan(),
        Case::Hyperbolic => (s0 / ell).atanh() + ((length - s0) / ell).atanh(),
    };
    Ok(StraighteningData {
        case,
        length,
        radius_a,
        radius_b,
        s0,
        ell,
        theta,
        theta_prime,
        b00,
        c00,
        kappa22,
        alpha,
    })
}

/// Quadratic part `D_s² + b₀₀(s)(±y²D_s² + D_y²)` in symbol form.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub case: Case,
    pub b00: SFun,
    pub alpha: f64,
    pub length: f64,
}

impl QuadraticModel {
    /// Transverse symbol `±y² + η²` in `(y, η)`.
    pub fn transverse(&self) -> Poly2 {
        Poly2::from_terms(
            Basis::YEta,
            2,
            [((2, 0), Complex64::new(self.case.sign(), 0.0)), ((0, 2), Complex64::new(1.0, 0.0))],
        )
    }

    /// Largest value of `b₀₀` and where it occurs.
    pub fn peak(&self) -> (f64, f64) {
        let nodes = self.b00.grid().nodes();
        self.b00
            .values()
            .iter()
            .zip(nodes)
            .map(|(v, &s)| (v.re, s))
            .fold((f64::NEG_INFINITY, 0.0), |acc, x| if x.0 > acc.0 { x } else { acc })
    }
}

pub fn quadratic_model(data: &StraighteningData) -> QuadraticModel {
    QuadraticModel { case: data.case, b00: data.b00.clone(), alpha: data.alpha, length: data.length }
}

/// Semiclassical parameters `N_k = √(πk/L)`.
pub fn semiclassical_n(k: u32, length: f64) -> f64 {
    (std::f64::consts::PI * k as f64 / length).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{linear_poincare, DomainJet};
    use crate::series::DEFAULT_NODES;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn symmetric_examples() {
        let d = solve_straightening(2.0, 2.0, 2.0, Case::Elliptic, DEFAULT_NODES).unwrap();
        assert!((d.s0 - 1.0).abs() < 1e-14 && (d.ell - 1.0).abs() < 1e-14);
        assert!((d.alpha_quadrature() - FRAC_PI_2).abs() < 1e-12);
        let d = solve_straightening(5.0, 5.0, 2.0, Case::Elliptic, DEFAULT_NODES).unwrap();
        assert!((d.s0 - 1.0).abs() < 1e-14 && (d.ell - 2.0).abs() < 1e-14);
        assert!((d.alpha_quadrature() - 2.0 * 0.5f64.atan()).abs() < 1e-12);
    }

    #[test]
    fn s0_matches_closed_form() {
        for &(ra, rb, l) in &[(3.0, 5.0, 2.0), (10.0, 2.5, 1.5), (4.0, 4.0, 3.0)] {
            let d = solve_straightening(ra, rb, l, Case::Elliptic, 65).unwrap();
            let s0 = l * (rb - l) / (ra + rb - 2.0 * l);
            assert!((d.s0 - s0).abs() < 1e-13);
            assert!((d.ell * d.ell - (l - s0) * (rb - l + s0)).abs() < 1e-12);
        }
    }

    #[test]
    fn profiles_satisfy_the_ode() {
        for case in [Case::Elliptic, Case::Hyperbolic] {
            let (r, l) = match case {
                Case::Elliptic => (5.0, 2.0),
                Case::Hyperbolic => (-5.0, 2.0),
            };
            let d = solve_straightening(r, r, l, case, DEFAULT_NODES).unwrap();
            assert!(d.ode_residual() < 1e-10, "{case:?}: {:e}", d.ode_residual());
            assert!(d.normalization_residual() < 1e-12);
            assert!((d.alpha_quadrature() - d.alpha).abs() < 1e-12);
            // c₀₀ = θ'/θ = 2κ₂₂
            let ratio = d.theta_prime.zip(&d.theta, |a, b| a / b);
            assert!(ratio.zip(&d.c00, |a, b| a - b).max_abs() < 1e-14);
        }
    }

    #[test]
    fn alpha_agrees_with_the_poincare_trace() {
        for &a0 in &[-0.1, -0.25, -0.4, 0.1, 0.3] {
            let jet = DomainJet::new(vec![a0]);
            let r = -1.0 / (2.0 * a0);
            let half_trace = 0.5 * linear_poincare(&jet).trace();
            let (case, expect) = if a0 < 0.0 { (Case::Elliptic, half_trace.acos()) } else { (Case::Hyperbolic, half_trace.acosh()) };
            let d = solve_straightening(r, r, 2.0, case, DEFAULT_NODES).unwrap();
            assert!((d.alpha_quadrature() - expect).abs() < 1e-9, "a0 = {a0}");
        }
    }

    #[test]
    fn inadmissible_geometries() {
        // hyperbolic with focusing mirrors shorter than L/2: θ² changes sign
        assert!(matches!(solve_straightening(0.8, 0.8, 2.0, Case::Hyperbolic, 33), Err(Error::NoAdmissibleRoot(_))));
        assert!(matches!(solve_straightening(-3.0, -3.0, 2.0, Case::Elliptic, 33), Err(Error::NoAdmissibleRoot(_))));
    }

    #[test]
    fn quadratic_model_signs_and_peak() {
        let d = solve_straightening(2.0, 2.0, 2.0, Case::Elliptic, DEFAULT_NODES).unwrap();
        let q = quadratic_model(&d);
        assert_eq!(q.transverse().coeff(2, 0), Complex64::new(1.0, 0.0));
        let (peak, at) = q.peak();
        assert!((peak - 1.0).abs() < 1e-15 && (at - 1.0).abs() < 1e-15);
        let h = solve_straightening(-5.0, -5.0, 2.0, Case::Hyperbolic, 33).unwrap();
        assert_eq!(quadratic_model(&h).transverse().coeff(2, 0), Complex64::new(-1.0, 0.0));
        assert!((semiclassical_n(4, std::f64::consts::PI) - 2.0).abs() < 1e-15);
    }
}

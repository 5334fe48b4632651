//! Bi-axisymmetric domains described by their boundary jet at the
//! bouncing-ball axis, plus the linear Poincaré map of that orbit.

mod curve;

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use curve::{to_curve, BoundaryCurve, Curve, CurvePoint, Ellipse, JetCurve, Symmetry};

/// Band around `|trace| = 2` classified as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Even Taylor jet `f(x) = 1 + a₀x² + a₁x⁴ + … + aₙx^{2n+2}` of the upper
/// boundary over the symmetry axis, in units where the half-height is 1.
/// The physical domain is this one scaled by `scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainJet {
    pub coeffs: Vec<f64>,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

impl DomainJet {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.is_empty() {
            return Err(Error::InvalidInput("jet needs at least a0".into()));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidInput(format!("scale must be positive, got {}", self.scale)));
        }
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("non-finite jet coefficient".into()));
        }
        Ok(())
    }

    pub fn a0(&self) -> f64 {
        self.coeffs[0]
    }

    /// Jet order `n` (number of coefficients minus one).
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `A = 2(2a₀ + 1)`.
    pub fn a_param(&self) -> f64 {
        2.0 * (2.0 * self.a0() + 1.0)
    }

    /// Normalized profile `f(x)` (polynomial jet, no closure).
    pub fn profile(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut p = x2;
        let mut f = 1.0;
        for &a in &self.coeffs {
            f += a * p;
            p *= x2;
        }
        f
    }

    /// Signed vertex curvature radius in physical units, positive when the
    /// center of curvature lies on the side of the opposite vertex.
    pub fn signed_radius(&self) -> Result<f64> {
        if self.a0() == 0.0 {
            return Err(Error::FlatVertex);
        }
        Ok(-self.scale / (2.0 * self.a0()))
    }
}

/// Vertex curvature radius `R_A = R_B = scale / (2|a₀|)`.
pub fn curvature_radius(jet: &DomainJet) -> Result<f64> {
    jet.validate()?;
    jet.signed_radius().map(f64::abs)
}

/// The linear Poincaré map `[[A−1, −A], [2−A, A−1]]` of the reduced map in
/// the normalized chord coordinates.
pub fn linear_poincare(jet: &DomainJet) -> Matrix2<f64> {
    let a = jet.a_param();
    Matrix2::new(a - 1.0, -a, 2.0 - a, a - 1.0)
}

/// Type of a periodic orbit from its linearization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "lowercase")]
pub enum OrbitClass {
    /// Eigenvalues `e^{±iα}`, `α ∈ (0, π)`.
    Elliptic { alpha: f64 },
    /// Eigenvalues `±e^{±λ}`; `reflected` when they are negative.
    Hyperbolic { lambda: f64, reflected: bool },
    /// `|trace| = 2` within [`DEGENERACY_TOL`]; `a_zero_excluded` marks `a₀ = −½`.
    Degenerate { trace: f64, a_zero_excluded: bool },
}

impl OrbitClass {
    pub fn from_trace(trace: f64) -> Self {
        let half = 0.5 * trace;
        if (trace.abs() - 2.0).abs() < DEGENERACY_TOL {
            OrbitClass::Degenerate { trace, a_zero_excluded: false }
        } else if half.abs() < 1.0 {
            OrbitClass::Elliptic { alpha: half.acos() }
        } else {
            OrbitClass::Hyperbolic { lambda: half.abs().acosh(), reflected: half < 0.0 }
        }
    }

    /// `α` for elliptic, `λ` for hyperbolic orbits.
    pub fn invariant(&self) -> Option<f64> {
        match *self {
            OrbitClass::Elliptic { alpha } => Some(alpha),
            OrbitClass::Hyperbolic { lambda, .. } => Some(lambda),
            OrbitClass::Degenerate { .. } => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OrbitClass::Elliptic { .. } => "elliptic",
            OrbitClass::Hyperbolic { .. } => "hyperbolic",
            OrbitClass::Degenerate { .. } => "degenerate",
        }
    }
}

/// Classifies the bouncing-ball orbit from the trace of [`linear_poincare`].
pub fn classify(jet: &DomainJet) -> OrbitClass {
    let trace = linear_poincare(jet).trace();
    match OrbitClass::from_trace(trace) {
        OrbitClass::Degenerate { trace, .. } => OrbitClass::Degenerate {
            trace,
            a_zero_excluded: (jet.a0() + 0.5).abs() < DEGENERACY_TOL,
        },
        c => c,
    }
}

/// Which symmetry axis carries the bouncing ball.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Vertical,
    Horizontal,
}

/// Jet of the ellipse `x²/a² + y²/b² = 1` at the end of the chosen axis,
/// normalized by the half-chord, with `order + 1` coefficients.
pub fn ellipse_jet(semi_x: f64, semi_y: f64, axis: Axis, order: usize) -> Result<DomainJet> {
    if !(semi_x > 0.0 && semi_y > 0.0) {
        return Err(Error::InvalidInput("ellipse semi-axes must be positive".into()));
    }
    let (across, along) = match axis {
        Axis::Vertical => (semi_x, semi_y),
        Axis::Horizontal => (semi_y, semi_x),
    };
    // y = b√(1 − x²/a²) with x = bX, y = bY: Y = √(1 − r X²), r = b²/a²
    let r = (along / across).powi(2);
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut binom = 1.0;
    for k in 1..=order + 1 {
        binom *= (0.5 - (k - 1) as f64) / k as f64;
        coeffs.push(binom * (-r).powi(k as i32));
    }
    Ok(DomainJet { coeffs, scale: along })
}

/// Domain description as read from files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Jet {
        coeffs: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
    },
    Ellipse { semi_x: f64, semi_y: f64 },
}

impl DomainSpec {
    /// The bouncing-ball jet (vertical axis) to the requested order.
    pub fn jet(&self, order: usize) -> Result<DomainJet> {
        match self {
            DomainSpec::Jet { coeffs, scale } => {
                let jet = DomainJet { coeffs: coeffs.clone(), scale: *scale };
                jet.validate()?;
                Ok(jet)
            }
            DomainSpec::Ellipse { semi_x, semi_y } => ellipse_jet(*semi_x, *semi_y, Axis::Vertical, order),
        }
    }

    pub fn curve(&self) -> Result<Curve> {
        match self {
            DomainSpec::Jet { coeffs, scale } => {
                to_curve(&DomainJet { coeffs: coeffs.clone(), scale: *scale })
            }
            DomainSpec::Ellipse { semi_x, semi_y } => Ok(Curve::Ellipse(Ellipse::new(*semi_x, *semi_y)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn curvature_radius_examples() {
        assert_eq!(curvature_radius(&DomainJet::new(vec![-0.5])).unwrap(), 1.0);
        assert_eq!(curvature_radius(&DomainJet::new(vec![-0.25])).unwrap(), 2.0);
        assert!(matches!(curvature_radius(&DomainJet::new(vec![0.0])), Err(Error::FlatVertex)));
        // finite-difference curvature of the graph y = 1 − 0.1 x²
        let jet = DomainJet::new(vec![-0.1]);
        let h = 1e-4;
        let f = |x: f64| jet.profile(x);
        let fpp = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let fp = (f(h) - f(-h)) / (2.0 * h);
        let kappa = fpp.abs() / (1.0 + fp * fp).powf(1.5);
        assert!((1.0 / kappa - curvature_radius(&jet).unwrap()).abs() < 1e-8 * 5.0 + 1e-7);
    }

    #[test]
    fn linear_poincare_examples() {
        let p = linear_poincare(&DomainJet::new(vec![-0.25]));
        assert_eq!(p, Matrix2::new(0.0, -1.0, 1.0, 0.0));
        let p = linear_poincare(&DomainJet::new(vec![-0.1]));
        assert!((p.trace() - 1.2).abs() < 1e-15);
        let p = linear_poincare(&DomainJet::new(vec![0.1]));
        assert!((p.trace() - 2.8).abs() < 1e-15);
        for k in 0..200 {
            let a0 = -2.0 + 0.02 * k as f64;
            let det = linear_poincare(&DomainJet::new(vec![a0])).determinant();
            assert!((det - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn classify_examples() {
        match classify(&DomainJet::new(vec![-0.25])) {
            OrbitClass::Elliptic { alpha } => assert!((alpha - FRAC_PI_2).abs() < 1e-15),
            c => panic!("{c:?}"),
        }
        match classify(&DomainJet::new(vec![0.1])) {
            OrbitClass::Hyperbolic { lambda, reflected } => {
                assert!((lambda - 1.4f64.acosh()).abs() < 1e-15);
                assert!((lambda - 0.867).abs() < 1e-3);
                assert!(!reflected);
            }
            c => panic!("{c:?}"),
        }
        assert_eq!(
            classify(&DomainJet::new(vec![-0.5])),
            OrbitClass::Degenerate { trace: -2.0, a_zero_excluded: true }
        );
    }

    #[test]
    fn classification_agrees_with_curvature_statement() {
        // symmetric case, chord 2: elliptic ⟺ R > 1 with the center of curvature below the axis
        for k in 1..400 {
            let a0 = -1.5 + 0.005 * k as f64;
            if a0.abs() < 1e-12 || (a0 + 0.5).abs() < 1e-9 {
                continue;
            }
            let jet = DomainJet::new(vec![a0]);
            let r = jet.signed_radius().unwrap();
            let elliptic = matches!(classify(&jet), OrbitClass::Elliptic { .. });
            assert_eq!(elliptic, r > 1.0, "a0 = {a0}");
        }
    }

    #[test]
    fn ellipse_jet_examples() {
        let j = ellipse_jet(1.0, 1.0, Axis::Vertical, 2).unwrap();
        assert_eq!(j.coeffs[0], -0.5);
        let j = ellipse_jet(2f64.sqrt(), 1.0, Axis::Vertical, 2).unwrap();
        assert!((j.coeffs[0] + 0.25).abs() < 1e-15);
        let j = ellipse_jet(1.0, 0.75, Axis::Vertical, 3).unwrap();
        assert_eq!(j.scale, 0.75);
        // independent oracle: Taylor coefficients of √(1 − r X²) from the generalized binomial series
        let r: f64 = 0.5625;
        let gb = |k: i32| -> f64 {
            let mut num = 1.0;
            for i in 0..k {
                num *= 0.5 - i as f64;
            }
            num / (1..=k).map(|i| i as f64).product::<f64>()
        };
        for (k, &a) in j.coeffs.iter().enumerate() {
            let kk = k as i32 + 1;
            assert!((a - gb(kk) * (-r).powi(kk)).abs() < 1e-15);
        }
        assert!((j.coeffs[0] + 0.28125).abs() < 1e-15);
        assert!(matches!(classify(&j), OrbitClass::Elliptic { .. }));
        let h = ellipse_jet(1.0, 0.75, Axis::Horizontal, 1).unwrap();
        assert!(matches!(classify(&h), OrbitClass::Hyperbolic { .. }));
        assert!(PI > 0.0);
    }

    #[test]
    fn domain_spec_parses() {
        let s: DomainSpec = serde_json::from_str(r#"{"kind":"jet","coeffs":[-0.25,0.01]}"#).unwrap();
        assert_eq!(s.jet(1).unwrap().scale, 1.0);
        let e: DomainSpec = serde_json::from_str(r#"{"kind":"ellipse","semi_x":1.0,"semi_y":0.75}"#).unwrap();
        assert!((e.jet(1).unwrap().a0() + 0.28125).abs() < 1e-15);
        assert!(serde_json::from_str::<DomainSpec>(r#"{"kind":"jet","coeffs":[1],"bogus":1}"#).is_err());
    }
}

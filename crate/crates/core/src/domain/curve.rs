use std::fmt;

use num_dual::{Dual2_64, DualNum};

use super::DomainJet;
use crate::error::{Error, Result};

/// Position and first two parameter derivatives of a boundary point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub pos: [f64; 2],
    pub d1: [f64; 2],
    pub d2: [f64; 2],
}

impl CurvePoint {
    pub fn speed(&self) -> f64 {
        self.d1[0].hypot(self.d1[1])
    }

    /// Unit tangent in the counterclockwise direction.
    pub fn tangent(&self) -> [f64; 2] {
        let s = self.speed();
        [self.d1[0] / s, self.d1[1] / s]
    }

    /// Unit normal pointing into the domain.
    pub fn inward_normal(&self) -> [f64; 2] {
        let t = self.tangent();
        [-t[1], t[0]]
    }

    /// Signed curvature, positive where the boundary bends toward the interior.
    pub fn curvature(&self) -> f64 {
        let [x1, y1] = self.d1;
        let [x2, y2] = self.d2;
        (x1 * y2 - y1 * x2) / self.speed().powi(3)
    }
}

/// Reflection symmetries of a closed curve parametrized counterclockwise
/// from the positive x-axis (`t = 0`), with period 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Symmetry {
    /// Invariant under `y ↦ −y`, i.e. `t ↦ 1 − t`.
    pub up_down: bool,
    /// Invariant under `x ↦ −x`, i.e. `t ↦ ½ − t`.
    pub left_right: bool,
}

/// Smooth closed boundary curve with period-1 parameter.
pub trait BoundaryCurve: Send + Sync + fmt::Debug {
    fn point(&self, t: f64) -> CurvePoint;
    fn symmetry(&self) -> Symmetry;
    /// Largest distance of the curve from the origin.
    fn max_radius(&self) -> f64 {
        (0..512)
            .map(|i| {
                let p = self.point(i as f64 / 512.0).pos;
                p[0].hypot(p[1])
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub semi_x: f64,
    pub semi_y: f64,
}

impl Ellipse {
    pub fn new(semi_x: f64, semi_y: f64) -> Result<Self> {
        if !(semi_x > 0.0 && semi_y > 0.0) {
            return Err(Error::InvalidInput("ellipse semi-axes must be positive".into()));
        }
        Ok(Self { semi_x, semi_y })
    }

    pub fn circle(r: f64) -> Self {
        Self { semi_x: r, semi_y: r }
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.semi_x * self.semi_y
    }

    pub fn foci(&self) -> [[f64; 2]; 2] {
        let (a, b) = (self.semi_x, self.semi_y);
        if a >= b {
            let c = (a * a - b * b).sqrt();
            [[c, 0.0], [-c, 0.0]]
        } else {
            let c = (b * b - a * a).sqrt();
            [[0.0, c], [0.0, -c]]
        }
    }
}

impl BoundaryCurve for Ellipse {
    fn point(&self, t: f64) -> CurvePoint {
        let w = 2.0 * std::f64::consts::PI;
        let (s, c) = (w * t).sin_cos();
        CurvePoint {
            pos: [self.semi_x * c, self.semi_y * s],
            d1: [-w * self.semi_x * s, w * self.semi_y * c],
            d2: [-w * w * self.semi_x * c, -w * w * self.semi_y * s],
        }
    }

    fn symmetry(&self) -> Symmetry {
        Symmetry { up_down: true, left_right: true }
    }

    fn max_radius(&self) -> f64 {
        self.semi_x.max(self.semi_y)
    }
}

/// Closed curve whose upper and lower arcs near the vertical axis are the
/// graphs `y = ±f(x)` of a jet, smoothly blended into an ellipse further out.
///
/// In normalized units the curve is `(X cos ψ, sgn(sin ψ)·F(X cos ψ))` with
/// `F = β f + (1 − β) E`, `E(x) = b_E √(1 − x²/X²)`, `β ≡ 1` for
/// `|x| ≤ 0.35 X` and `β ≡ 0` for `|x| ≥ 0.7 X`. For `a₀ < 0` the ellipse has
/// `b_E = 1` and `X = 1/√(2|a₀|)`, so it shares the vertex curvature.
#[derive(Debug, Clone, PartialEq)]
pub struct JetCurve {
    jet: DomainJet,
    half_width: f64,
    ellipse_height: f64,
    inner: f64,
    outer: f64,
}

impl JetCurve {
    pub fn jet(&self) -> &DomainJet {
        &self.jet
    }

    /// Half-width `X` of the closure in normalized units.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    fn ellipse_arc<D: DualNum<f64> + Copy>(&self, x: D) -> D {
        let u = x / self.half_width;
        (D::one() - u * u).sqrt() * self.ellipse_height
    }

    fn blend<D: DualNum<f64> + Copy>(&self, x: D) -> D {
        let t = (x * x - self.inner * self.inner) / (self.outer * self.outer - self.inner * self.inner);
        if t.re() <= 0.0 {
            return D::one();
        }
        if t.re() >= 1.0 {
            return D::zero();
        }
        let h = |v: D| (-v.recip()).exp();
        let a = h(t);
        let b = h(D::one() - t);
        b / (a + b)
    }

    fn jet_profile<D: DualNum<f64> + Copy>(&self, x: D) -> D {
        let x2 = x * x;
        let mut p = x2;
        let mut f = D::one();
        for &a in &self.jet.coeffs {
            f += p * a;
            p *= x2;
        }
        f
    }

    /// Closed profile `F(x)` in normalized units, for `|x| < X`.
    pub fn closed_profile(&self, x: f64) -> f64 {
        self.profile_dual(Dual2_64::from_re(x)).re
    }

    fn profile_dual(&self, x: Dual2_64) -> Dual2_64 {
        let beta = self.blend(x);
        if beta.re == 0.0 {
            return self.ellipse_arc(x);
        }
        if beta.re == 1.0 && x.re.abs() <= self.inner {
            return self.jet_profile(x);
        }
        beta * self.jet_profile(x) + (Dual2_64::from_re(1.0) - beta) * self.ellipse_arc(x)
    }
}

impl BoundaryCurve for JetCurve {
    fn point(&self, t: f64) -> CurvePoint {
        let w = 2.0 * std::f64::consts::PI;
        let td = Dual2_64::from_re(t).derivative();
        let psi = td * w;
        let x = psi.cos() * self.half_width;
        let y = if x.re.abs() >= self.outer {
            psi.sin() * self.ellipse_height
        } else {
            let f = self.profile_dual(x);
            if psi.re.sin() >= 0.0 {
                f
            } else {
                -f
            }
        };
        let r = self.jet.scale;
        CurvePoint {
            pos: [r * x.re, r * y.re],
            d1: [r * x.v1, r * y.v1],
            d2: [r * x.v2, r * y.v2],
        }
    }

    fn symmetry(&self) -> Symmetry {
        Symmetry { up_down: true, left_right: true }
    }
}

/// A concrete boundary curve.
#[derive(Debug, Clone, PartialEq)]
pub enum Curve {
    Ellipse(Ellipse),
    Jet(JetCurve),
}

impl BoundaryCurve for Curve {
    fn point(&self, t: f64) -> CurvePoint {
        match self {
            Curve::Ellipse(e) => e.point(t),
            Curve::Jet(j) => j.point(t),
        }
    }

    fn symmetry(&self) -> Symmetry {
        match self {
            Curve::Ellipse(e) => e.symmetry(),
            Curve::Jet(j) => j.symmetry(),
        }
    }

    fn max_radius(&self) -> f64 {
        match self {
            Curve::Ellipse(e) => e.max_radius(),
            Curve::Jet(j) => j.max_radius(),
        }
    }
}

/// Closes a boundary jet into a smooth curve (see [`JetCurve`]).
///
/// The circle jet `(−½)` and other pure-ellipse jets give exact ellipses.
pub fn to_curve(jet: &DomainJet) -> Result<Curve> {
    jet.validate()?;
    let a0 = jet.a0();
    let (half_width, ellipse_height) = if a0 < 0.0 {
        ((1.0 / (2.0 * a0.abs())).sqrt(), 1.0)
    } else {
        (1.5, 1.3)
    };
    // a jet that is exactly an ellipse's jet needs no blending
    if a0 < 0.0 {
        let e = super::ellipse_jet(half_width, 1.0, super::Axis::Vertical, jet.order())?;
        if e.coeffs.iter().zip(&jet.coeffs).all(|(a, b)| (a - b).abs() < 1e-15) {
            return Ok(Curve::Ellipse(Ellipse::new(half_width * jet.scale, jet.scale)?));
        }
    }
    let curve = JetCurve {
        jet: jet.clone(),
        half_width,
        ellipse_height,
        inner: 0.35 * half_width,
        outer: 0.7 * half_width,
    };
    let samples = 4000;
    for i in 0..samples {
        let x = half_width * (i as f64 + 0.5) / samples as f64;
        let f = curve.closed_profile(x);
        if !(f > 0.0) {
            return Err(Error::SelfIntersection(format!("closed profile F({x:.4}) = {f:.3e} is not positive")));
        }
    }
    Ok(Curve::Jet(curve))
}

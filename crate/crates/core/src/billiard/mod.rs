//! Billiard dynamics in a smooth closed curve: the numerical oracle for the
//! Poincaré map and the Birkhoff coefficients of the bouncing-ball orbit.

mod fit;
mod orbit;

pub use fit::{fit_birkhoff, BirkhoffFit, FitOptions, RotationSample};
pub use orbit::{find_bouncing_ball, numeric_poincare, PeriodicOrbit};

use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryCurve, Curve};
use crate::error::{Error, Result};

/// Boundary parameter `t ∈ [0, 1)` and tangential momentum `p ∈ (−1, 1)`
/// along the counterclockwise tangent, both taken after the reflection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BilliardState {
    pub t: f64,
    pub p: f64,
}

impl BilliardState {
    pub fn new(t: f64, p: f64) -> Self {
        Self { t: t.rem_euclid(1.0), p }
    }
}

/// Mirror used to fold a symmetric 2-periodic orbit onto a fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    /// `y ↦ −y`: `(t, p) ↦ (1 − t, −p)`.
    UpDown,
    /// `x ↦ −x`: `(t, p) ↦ (½ − t, −p)`.
    LeftRight,
}

impl Reduction {
    pub fn apply(self, s: BilliardState) -> BilliardState {
        match self {
            Reduction::UpDown => BilliardState::new(1.0 - s.t, -s.p),
            Reduction::LeftRight => BilliardState::new(0.5 - s.t, -s.p),
        }
    }
}

const POLY_SAMPLES: usize = 4096;

/// A boundary curve with a cached polyline used to bracket ray intersections.
#[derive(Debug, Clone)]
pub struct Table {
    curve: Curve,
    poly: Vec<[f64; 2]>,
    size: f64,
}

impl Table {
    pub fn new(curve: Curve) -> Self {
        let poly: Vec<[f64; 2]> = (0..POLY_SAMPLES).map(|i| curve.point(i as f64 / POLY_SAMPLES as f64).pos).collect();
        let size = curve.max_radius();
        Self { curve, poly, size }
    }

    pub fn curve(&self) -> &Curve {
        &self.curve
    }

    /// One bounce.
    pub fn bounce(&self, s: BilliardState) -> Result<BilliardState> {
        billiard_map(self, s)
    }

    /// One bounce followed by the mirror.
    pub fn reduced(&self, s: BilliardState, red: Reduction) -> Result<BilliardState> {
        Ok(red.apply(billiard_map(self, s)?))
    }

    /// Launch direction of a state.
    pub fn direction(&self, s: BilliardState) -> Result<[f64; 2]> {
        if !(s.p.abs() < 1.0) {
            return Err(Error::Tangency);
        }
        let cp = self.curve.point(s.t);
        let (tn, nn) = (cp.tangent(), cp.inward_normal());
        let q = (1.0 - s.p * s.p).sqrt();
        Ok([s.p * tn[0] + q * nn[0], s.p * tn[1] + q * nn[1]])
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// The billiard ball map: follow the chord to the next boundary point and
/// reflect (tangential momentum kept, normal component flipped).
pub fn billiard_map(table: &Table, s: BilliardState) -> Result<BilliardState> {
    let d = table.direction(s)?;
    let start = table.curve.point(s.t).pos;
    let n = table.poly.len();
    let own = ((s.t * n as f64).floor() as usize) % n;

    // nearest polyline crossing
    let mut best: Option<(f64, usize)> = None;
    let s_min = 1e-9 * table.size;
    for i in 0..n {
        if i == own {
            continue;
        }
        let a = table.poly[i];
        let b = table.poly[(i + 1) % n];
        let e = sub(b, a);
        let den = cross(d, e);
        if den == 0.0 {
            continue;
        }
        let ap = sub(a, start);
        let u = cross(ap, d) / den;
        let dist = cross(ap, e) / den;
        if (-1e-12..=1.0 + 1e-12).contains(&u) && dist > s_min && best.map_or(true, |(bd, _)| dist < bd) {
            best = Some((dist, i));
        }
    }
    let (_, seg) = best.ok_or_else(|| Error::Intersection("ray leaves the polyline".into()))?;

    let g = |tau: f64| {
        let cp = table.curve.point(tau);
        (cross(sub(cp.pos, start), d), cross(cp.d1, d))
    };
    let h = 1.0 / n as f64;
    let mut lo = seg as f64 * h;
    let mut hi = lo + h;
    let (mut glo, mut ghi) = (g(lo).0, g(hi).0);
    // the curve can sit slightly off the chord polyline; widen once
    if glo * ghi > 0.0 {
        lo -= h;
        hi += h;
        glo = g(lo).0;
        ghi = g(hi).0;
        if glo * ghi > 0.0 {
            return Err(Error::Intersection(format!("no sign change near t = {:.6}", seg as f64 * h)));
        }
    }
    let mut tau = 0.5 * (lo + hi);
    let mut converged = false;
    for _ in 0..200 {
        let (val, der) = g(tau);
        if val == 0.0 {
            converged = true;
            break;
        }
        if (val < 0.0) == (glo < 0.0) {
            lo = tau;
            glo = val;
        } else {
            hi = tau;
        }
        let newton = tau - val / der;
        let next = if der != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - tau).abs();
        tau = next;
        if step < 1e-14 || hi - lo < 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Intersection(format!("Newton stalled near t = {tau:.6}")));
    }
    let cp = table.curve.point(tau);
    if dot(sub(cp.pos, start), d) <= 0.0 {
        return Err(Error::Intersection("intersection behind the start point".into()));
    }
    let p = dot(d, cp.tangent());
    if !(p.abs() < 1.0) {
        return Err(Error::Tangency);
    }
    Ok(BilliardState::new(tau, p))
}

/// Iterates the (reduced) map, returning the states visited after each step.
pub fn orbit(table: &Table, start: BilliardState, steps: usize, red: Option<Reduction>) -> Result<Vec<BilliardState>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(start);
    let mut s = start;
    for _ in 0..steps {
        s = match red {
            Some(r) => table.reduced(s, r)?,
            None => billiard_map(table, s)?,
        };
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{to_curve, DomainJet, Ellipse};
    use std::f64::consts::TAU;

    fn wrap(x: f64) -> f64 {
        let y = x.rem_euclid(1.0);
        if y > 0.5 {
            y - 1.0
        } else {
            y
        }
    }

    #[test]
    fn circle_advances_by_chord_angle() {
        let table = Table::new(Curve::Ellipse(Ellipse::circle(1.0)));
        // incidence angle φ from the tangent: p = cos φ, arc advance 2φ
        let phi: f64 = 0.7;
        let mut s = BilliardState::new(0.1, phi.cos());
        for _ in 0..50 {
            let next = billiard_map(&table, s).unwrap();
            assert!((wrap(next.t - s.t) - 2.0 * phi / TAU).abs() < 1e-13);
            assert!((next.p - s.p).abs() < 1e-13);
            s = next;
        }
    }

    #[test]
    fn axis_orbit_hits_the_opposite_vertex() {
        let table = Table::new(Curve::Ellipse(Ellipse::new(1.0, 0.75).unwrap()));
        let s = billiard_map(&table, BilliardState::new(0.75, 0.0)).unwrap();
        assert!((s.t - 0.25).abs() < 1e-12 && s.p.abs() < 1e-12);
        let s = billiard_map(&table, BilliardState::new(0.5, 0.0)).unwrap();
        assert!(wrap(s.t).abs() < 1e-12 && s.p.abs() < 1e-12);
    }

    #[test]
    fn ellipse_focal_invariant_is_conserved() {
        let e = Ellipse::new(1.0, 0.6).unwrap();
        let [f1, f2] = e.foci();
        let table = Table::new(Curve::Ellipse(e));
        let invariant = |s: BilliardState| {
            let d = table.direction(s).unwrap();
            let pos = table.curve().point(s.t).pos;
            cross(sub(f1, pos), d) * cross(sub(f2, pos), d)
        };
        let mut s = BilliardState::new(0.13, 0.42);
        let c0 = invariant(s);
        for _ in 0..100 {
            s = billiard_map(&table, s).unwrap();
            assert!((invariant(s) - c0).abs() < 1e-9, "{} vs {c0}", invariant(s));
        }
    }

    #[test]
    fn momentum_stays_bounded_and_reversibility_holds() {
        let table = Table::new(to_curve(&DomainJet::new(vec![-0.2, 0.01])).unwrap());
        let mut s = BilliardState::new(0.74, 0.3);
        let start = s;
        let mut path = vec![s];
        for _ in 0..40 {
            s = billiard_map(&table, s).unwrap();
            assert!(s.p.abs() < 1.0);
            path.push(s);
        }
        // time reversal: (t, p) ↦ (t, −p) retraces the orbit
        let mut r = BilliardState::new(s.t, -s.p);
        for _ in 0..40 {
            r = billiard_map(&table, r).unwrap();
        }
        assert!(wrap(r.t - start.t).abs() < 1e-9 && (r.p + start.p).abs() < 1e-9);
    }

    #[test]
    fn tangent_launch_is_rejected() {
        let table = Table::new(Curve::Ellipse(Ellipse::circle(1.0)));
        assert_eq!(billiard_map(&table, BilliardState::new(0.0, 1.0)), Err(Error::Tangency));
    }
}

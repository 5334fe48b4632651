use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use super::{billiard_map, BilliardState, Reduction, Table};
use crate::domain::{Axis, BoundaryCurve};
use crate::error::{Error, Result};

/// A periodic billiard trajectory given by its reflection points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub params: Vec<f64>,
    pub points: Vec<[f64; 2]>,
    pub length: f64,
    pub axis: Axis,
    /// Largest `|p|` at the reflections (0 for an exact bouncing ball).
    pub reflection_residual: f64,
}

impl PeriodicOrbit {
    pub fn period(&self) -> usize {
        self.params.len()
    }

    /// State leaving the first reflection point.
    pub fn base_state(&self) -> BilliardState {
        BilliardState::new(self.params[0], 0.0)
    }

    /// Mirror folding the orbit onto a fixed point of the reduced map.
    pub fn reduction(&self) -> Reduction {
        match self.axis {
            Axis::Vertical => Reduction::UpDown,
            Axis::Horizontal => Reduction::LeftRight,
        }
    }
}

/// The 2-periodic orbit along a symmetry axis.
///
/// Starts from the vertex (`t = ¾` bottom, `t = ½` left) and refines the
/// launch parameter by secant steps on the outgoing momentum after one bounce.
pub fn find_bouncing_ball(table: &Table, axis: Axis) -> Result<PeriodicOrbit> {
    let t_start = match axis {
        Axis::Vertical => 0.75,
        Axis::Horizontal => 0.5,
    };
    let g = |t: f64| billiard_map(table, BilliardState::new(t, 0.0)).map(|s| s.p);
    let mut t0 = t_start;
    let mut g0 = g(t0)?;
    let mut t1 = t_start + 1e-6;
    let mut converged = g0.abs() < 1e-14;
    for _ in 0..50 {
        if converged {
            break;
        }
        let g1 = g(t1)?;
        if g1.abs() < 1e-14 {
            t0 = t1;
            g0 = g1;
            converged = true;
            break;
        }
        let next = t1 - g1 * (t1 - t0) / (g1 - g0);
        t0 = t1;
        g0 = g1;
        t1 = next;
    }
    if !converged && g0.abs() > 1e-12 {
        return Err(Error::NoConvergence(format!("bouncing-ball search stalled, residual {g0:.3e}")));
    }
    let other = billiard_map(table, BilliardState::new(t0, 0.0))?;
    let back = billiard_map(table, BilliardState::new(other.t, 0.0))?;
    let residual = other.p.abs().max(back.p.abs());
    if residual > 1e-10 || (back.t - t0).abs().min(1.0 - (back.t - t0).abs()) > 1e-10 {
        return Err(Error::NoConvergence(format!("axis orbit does not close, residual {residual:.3e}")));
    }
    let c = table.curve();
    let (a, b) = (c.point(t0).pos, c.point(other.t).pos);
    Ok(PeriodicOrbit {
        params: vec![t0, other.t],
        points: vec![a, b],
        length: 2.0 * (a[0] - b[0]).hypot(a[1] - b[1]),
        axis,
        reflection_residual: residual,
    })
}

/// Jacobian of the reduced return map at the orbit in the transversal
/// coordinates `(σ, p)`, `σ` the arclength offset from the base point.
///
/// Central differences at steps `h` and `h/2` (in `t` and `p`), combined by
/// Richardson extrapolation. Disagreement between the two beyond `1e-4`
/// relative signals a step in the noise floor.
pub fn numeric_poincare(table: &Table, orbit: &PeriodicOrbit, h: f64) -> Result<Matrix2<f64>> {
    let base = orbit.base_state();
    let red = orbit.reduction();
    let f = |dt: f64, dp: f64| -> Result<[f64; 2]> {
        let s = table.reduced(BilliardState::new(base.t + dt, base.p + dp), red)?;
        let mut dt_out = s.t - base.t;
        dt_out -= dt_out.round();
        Ok([dt_out, s.p - base.p])
    };
    let jac = |h: f64| -> Result<Matrix2<f64>> {
        let (tp, tm) = (f(h, 0.0)?, f(-h, 0.0)?);
        let (pp, pm) = (f(0.0, h)?, f(0.0, -h)?);
        let c = 0.5 / h;
        Ok(Matrix2::new((tp[0] - tm[0]) * c, (pp[0] - pm[0]) * c, (tp[1] - tm[1]) * c, (pp[1] - pm[1]) * c))
    };
    let coarse = jac(h)?;
    let fine = jac(0.5 * h)?;
    let gap = (coarse - fine).abs().max() / fine.abs().max().max(1.0);
    if gap > 1e-4 || !gap.is_finite() {
        return Err(Error::NoisyDifferences(gap));
    }
    let m_t = (fine * 4.0 - coarse) / 3.0;
    let speed = table.curve().point(base.t).speed();
    let d = Matrix2::new(speed, 0.0, 0.0, 1.0);
    let d_inv = Matrix2::new(1.0 / speed, 0.0, 0.0, 1.0);
    Ok(d * m_t * d_inv)
}

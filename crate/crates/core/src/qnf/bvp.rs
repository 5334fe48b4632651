use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::series::SFun;

/// Backward-error tolerance for the collocation solve.
pub const BVP_TOL: f64 = 1e-8;

/// Solves `−y'' + c·y = rhs` on `[0, L]` with `y(0) = y(L) = 0` by Chebyshev
/// collocation on the grid of `rhs`.
///
/// The returned residual is the normwise backward error
/// `‖Ay − b‖∞ / (‖A‖∞‖y‖∞ + ‖b‖∞)` of the collocation system.
pub fn solve_dirichlet(c: f64, rhs: &SFun) -> Result<(SFun, f64)> {
    let grid = rhs.grid().clone();
    let n = grid.len();
    let d = grid.diff_matrix();
    let mut a: DMatrix<f64> = -(d * d);
    for i in 0..n {
        a[(i, i)] += c;
    }
    for &row in &[0, n - 1] {
        a.row_mut(row).fill(0.0);
        a[(row, row)] = 1.0;
    }
    let lu = a.clone().lu();
    let solve = |part: fn(&Complex64) -> f64| -> Result<(DVector<f64>, f64)> {
        let mut b = DVector::from_iterator(n, rhs.values().iter().map(part));
        b[0] = 0.0;
        b[n - 1] = 0.0;
        let y = lu.solve(&b).ok_or(Error::BvpResidual(f64::INFINITY))?;
        let r = (&a * &y - &b).amax();
        let scale = a.row_iter().map(|row| row.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) * y.amax() + b.amax();
        Ok((y, if scale > 0.0 { r / scale } else { 0.0 }))
    };
    let (re, r1) = solve(|v| v.re)?;
    let (im, r2) = solve(|v| v.im)?;
    let residual = r1.max(r2);
    if !(residual <= BVP_TOL) {
        return Err(Error::BvpResidual(residual));
    }
    let values = re.iter().zip(im.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect();
    Ok((SFun::from_values(grid, values), residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{ChebGrid, DEFAULT_NODES};
    use std::f64::consts::PI;

    #[test]
    fn eigenfunction_right_hand_side() {
        let l = 2.0;
        let grid = ChebGrid::new(DEFAULT_NODES, l);
        for &cc in &[0.3, 1.1, 2.9] {
            let rhs = SFun::from_real_fn(&grid, |s| (PI * s / l).sin());
            // −p'' − c²p = sin(πs/L)
            let (p, res) = solve_dirichlet(-cc * cc, &rhs).unwrap();
            assert!(res < 1e-14);
            let k2 = (PI / l).powi(2) - cc * cc;
            for (&s, v) in grid.nodes().iter().zip(p.values()) {
                assert!((v.re - (PI * s / l).sin() / k2).abs() < 1e-11, "c = {cc}");
                assert_eq!(v.im, 0.0);
            }
        }
    }

    #[test]
    fn complex_forcing_with_positive_shift() {
        let l = 1.5;
        let grid = ChebGrid::new(65, l);
        // y = s(L − s)(1 + i s) solves −y'' + 4y = rhs
        let y = |s: f64| Complex64::new(s * (l - s), s * s * (l - s));
        let ypp = |s: f64| Complex64::new(-2.0, 2.0 * l - 6.0 * s);
        let rhs = SFun::from_fn(&grid, |s| -ypp(s) + y(s) * 4.0);
        let (sol, _) = solve_dirichlet(4.0, &rhs).unwrap();
        for (&s, v) in grid.nodes().iter().zip(sol.values()) {
            assert!((v - y(s)).norm() < 1e-12);
        }
    }
}

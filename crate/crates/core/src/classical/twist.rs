use num_complex::Complex64;

use crate::domain::DomainJet;
use crate::error::{Error, Result};
use crate::series::{sqrt_one_plus, implicit_eliminate, Basis, Poly2, Series3, SeriesMap};

/// Taylor jet of the chord length between `(x, 1)` on the upper wall,
/// `(s, −f(s))` on the lower wall and `(x₁, 1)` again, i.e. the
/// generating function `φ(x, x₁, s)` of the reduced bouncing-ball map.
///
/// The degree-`2k+2` slice carries `a_k` linearly, so order `n` keeps total
/// degree up to `2n + 2`.
pub fn generating_function(jet: &DomainJet, n: usize) -> Result<Series3> {
    jet.validate()?;
    if n > jet.order() {
        return Err(Error::InvalidInput(format!("order {n} exceeds jet order {}", jet.order())));
    }
    let d = 2 * n as u32 + 2;
    let x = Series3::var(d, 0);
    let x1 = Series3::var(d, 1);
    let s = Series3::var(d, 2);

    // g = f − 1 = Σ a_k s^{2k+2}
    let mut g = Series3::new(d);
    for (k, &a) in jet.coeffs.iter().take(n + 1).enumerate() {
        g.add_term((0, 0, 2 * k as u32 + 2), a);
    }
    let f2m1 = g.scale(2.0).add(&g.mul(&g));
    let sqrt = sqrt_one_plus(d as usize / 2 + 1);
    let leg = |p: &Series3| p.sub(&s).powi(2).add(&f2m1).compose_univariate(&sqrt);
    Ok(leg(&x).add(&leg(&x1)))
}

/// The reduced map `T : (x, ξ) ↦ (x₁, ξ₁)` as a polynomial jet.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistMapJet {
    pub map: SeriesMap,
    pub order: usize,
    pub source: DomainJet,
}

impl TwistMapJet {
    /// `max_degree = 2n + 1`.
    pub fn degree(&self) -> u32 {
        self.map.max_degree()
    }

    pub fn apply(&self, x: f64, xi: f64) -> (f64, f64) {
        let (a, b) = self.map.apply(Complex64::new(x, 0.0), Complex64::new(xi, 0.0));
        (a.re, b.re)
    }
}

/// Builds the twist map from `φ`.
///
/// With `s* (x, x₁)` the critical bounce point, `ξ = ∂ₓφ` and `ξ₁ = −∂_{x₁}φ`.
/// When `φ = ℓ(x, s) + ℓ(x₁, s)` splits into two mirrored legs (always the
/// case for [`generating_function`]) the map is built as the composition of
/// the two wall-to-wall maps generated by `ℓ`. Otherwise `s*` is eliminated
/// first and `ξ = ∂ₓφ(x, x₁, s*)` is solved for `x₁`.
///
/// The split matters near `A → 0`: `∂²φ/∂s² = A` is then small and the
/// eliminated series has coefficients many orders of magnitude above those
/// of the map, which cancel in floating point. Each leg has `∂²ℓ/∂x∂s = −1`.
pub fn twist_map(phi: &Series3, source: &DomainJet) -> Result<TwistMapJet> {
    let d = phi.max_degree() - 1;
    if (2.0 * phi.coeff((0, 0, 2))).abs() < 1e-12 {
        return Err(Error::Degenerate);
    }
    let map = match split_legs(phi) {
        Some(leg) => {
            let down = wall_map(&leg, d)?;
            let up = wall_map(&swap(&leg), d)?;
            up.compose(&down)
        }
        None => eliminated_map(phi, d)?,
    };
    let order = (d as usize - 1) / 2;
    Ok(TwistMapJet { map, order, source: source.clone() })
}

fn eliminated_map(phi: &Series3, d: u32) -> Result<SeriesMap> {
    let s_star = implicit_eliminate(phi)?;
    let xi = phi.derivative(0).substitute_s(&s_star).truncated(d);
    let xi1 = phi.derivative(1).substitute_s(&s_star).truncated(d);
    let x1 = solve_second(&xi, d)?;
    let xv = Poly2::coordinate(Basis::YEta, d, true);
    SeriesMap::new(x1.clone(), xi1.compose(&xv, &x1).scale(Complex64::new(-1.0, 0.0)))
}

/// `ℓ(p, q)` with `φ = ℓ(x, s) + ℓ(x₁, s)`, if `φ` has that form.
fn split_legs(phi: &Series3) -> Option<Poly2> {
    let scale = phi.terms().values().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut leg = Poly2::new(Basis::YEta, phi.max_degree());
    for (&(i, j, k), &c) in phi.terms() {
        match (i, j) {
            (0, 0) => leg.add_term(0, k, Complex64::new(0.5 * c, 0.0)),
            (_, 0) => {
                if (phi.coeff((0, i, k)) - c).abs() > 1e-14 * scale {
                    return None;
                }
                leg.add_term(i, k, Complex64::new(c, 0.0));
            }
            (0, _) => {
                if phi.coeff((j, 0, k)) == 0.0 {
                    return None;
                }
            }
            _ => return None,
        }
    }
    Some(leg)
}

fn swap(p: &Poly2) -> Poly2 {
    Poly2::from_terms(p.basis(), p.max_degree(), p.terms().iter().map(|(&(a, b), &c)| ((b, a), c)))
}

/// The map `(p, ∂_p ℓ) ↦ (q, −∂_q ℓ)` generated by `ℓ(p, q)`.
fn wall_map(leg: &Poly2, d: u32) -> Result<SeriesMap> {
    let dp = leg.derivative(1, 0).truncated(d);
    let dq = leg.derivative(0, 1).truncated(d);
    let q = solve_second(&dp, d)?;
    let xv = Poly2::coordinate(Basis::YEta, d, true);
    SeriesMap::new(q.clone(), dq.compose(&xv, &q).scale(Complex64::new(-1.0, 0.0)))
}

/// Solves `ξ = g(x, y)` for `y(x, ξ)` by fixed-point iteration on the
/// nonlinear part.
fn solve_second(g: &Poly2, d: u32) -> Result<Poly2> {
    let g10 = g.coeff(1, 0);
    let g01 = g.coeff(0, 1);
    if g01.norm() < 1e-12 {
        return Err(Error::Degenerate);
    }
    let mut nonlin = g.clone();
    nonlin.add_term(1, 0, -g10);
    nonlin.add_term(0, 1, -g01);

    // in the (x, ξ) slots: y = (ξ − g₁₀ x − N(x, y)) / g₀₁
    let xv = Poly2::coordinate(Basis::YEta, d, true);
    let lin = Poly2::from_terms(Basis::YEta, d, [((1, 0), -g10 / g01), ((0, 1), 1.0 / g01)]);
    let mut y = lin.clone();
    for _ in 0..d {
        let next = lin.sub(&nonlin.compose(&xv, &y).scale(1.0 / g01));
        if next == y {
            break;
        }
        y = next;
    }
    Ok(y)
}

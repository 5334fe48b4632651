use num_complex::Complex64;

use super::{Basis, Poly2, Series3};
use crate::error::{Error, Result};

/// A polynomial map given by the images of the two phase coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMap {
    pub first: Poly2,
    pub second: Poly2,
}

impl SeriesMap {
    pub fn new(first: Poly2, second: Poly2) -> Result<Self> {
        if first.basis() != second.basis() {
            return Err(Error::BasisMismatch(first.basis(), second.basis()));
        }
        let d = first.max_degree().min(second.max_degree());
        Ok(Self { first: first.with_max_degree(d), second: second.with_max_degree(d) })
    }

    pub fn identity(basis: Basis, max_degree: u32) -> Self {
        Self {
            first: Poly2::coordinate(basis, max_degree, true),
            second: Poly2::coordinate(basis, max_degree, false),
        }
    }

    /// Linear map `(u, v) ↦ M (u, v)`.
    pub fn linear(basis: Basis, max_degree: u32, m: [[Complex64; 2]; 2]) -> Self {
        let f = Poly2::from_terms(basis, max_degree, [((1, 0), m[0][0]), ((0, 1), m[0][1])]);
        let s = Poly2::from_terms(basis, max_degree, [((1, 0), m[1][0]), ((0, 1), m[1][1])]);
        Self { first: f, second: s }
    }

    pub fn basis(&self) -> Basis {
        self.first.basis()
    }

    pub fn max_degree(&self) -> u32 {
        self.first.max_degree()
    }

    pub fn linear_part(&self) -> [[Complex64; 2]; 2] {
        [
            [self.first.coeff(1, 0), self.first.coeff(0, 1)],
            [self.second.coeff(1, 0), self.second.coeff(0, 1)],
        ]
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SeriesMap) -> SeriesMap {
        SeriesMap {
            first: self.first.compose(&inner.first, &inner.second),
            second: self.second.compose(&inner.first, &inner.second),
        }
    }

    pub fn truncated(&self, max_degree: u32) -> SeriesMap {
        SeriesMap { first: self.first.truncated(max_degree), second: self.second.truncated(max_degree) }
    }

    pub fn apply(&self, u: Complex64, v: Complex64) -> (Complex64, Complex64) {
        (self.first.eval(u, v), self.second.eval(u, v))
    }

    /// Jacobian determinant minus 1, exact through degree `max_degree − 1`.
    pub fn symplecticity_residual(&self) -> Poly2 {
        let d = self.max_degree().saturating_sub(1);
        let fu = self.first.derivative(1, 0).truncated(d);
        let fv = self.first.derivative(0, 1).truncated(d);
        let gu = self.second.derivative(1, 0).truncated(d);
        let gv = self.second.derivative(0, 1).truncated(d);
        fu.mul(&gv).sub(&fv.mul(&gu)).sub(&Poly2::one(self.basis(), d))
    }

    pub fn distance(&self, other: &SeriesMap) -> f64 {
        self.first.distance(&other.first).max(self.second.distance(&other.second))
    }
}

/// Solves `∂φ/∂s (x, x₁, s) = 0` for `s = s*(x, x₁)` order by order.
///
/// Requires `φ` without terms linear in `s` alone at the origin and a nonzero
/// `∂²φ/∂s²(0)`. The result is a polynomial in `(x, x₁)` (tagged `YEta`).
pub fn implicit_eliminate(phi: &Series3) -> Result<Poly2> {
    let d = phi.max_degree().saturating_sub(1);
    let phi_s = phi.derivative(2);
    let a = phi_s.coeff((0, 0, 1));
    if a.abs() < 1e-12 {
        return Err(Error::Degenerate);
    }
    if phi_s.coeff((0, 0, 0)) != 0.0 {
        return Err(Error::InvalidInput("∂φ/∂s does not vanish at the origin".into()));
    }
    // φ_s = a·s + rest; iterate s ← −rest(x, x₁, s)/a, one degree gained per pass
    let mut rest = phi_s.clone();
    rest.add_term((0, 0, 1), -a);
    let mut s_star = Poly2::new(Basis::YEta, d);
    for _ in 0..=d {
        let next = rest.substitute_s(&s_star).scale(Complex64::new(-1.0 / a, 0.0)).truncated(d);
        if next == s_star {
            break;
        }
        s_star = next;
    }
    Ok(s_star)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_elimination() {
        // φ₀ at a₀ = −1/4: ½(x² + x₁²) − s(x + x₁) + ½ s²
        let mut phi = Series3::new(2);
        phi.add_term((2, 0, 0), 0.5);
        phi.add_term((0, 2, 0), 0.5);
        phi.add_term((1, 0, 1), -1.0);
        phi.add_term((0, 1, 1), -1.0);
        phi.add_term((0, 0, 2), 0.5);
        let s = implicit_eliminate(&phi).unwrap();
        assert_eq!(s.coeff(1, 0), Complex64::new(1.0, 0.0));
        assert_eq!(s.coeff(0, 1), Complex64::new(1.0, 0.0));
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn degenerate_quadratic_part() {
        let mut phi = Series3::new(2);
        phi.add_term((1, 0, 1), -1.0);
        phi.add_term((0, 1, 1), -1.0);
        assert_eq!(implicit_eliminate(&phi), Err(Error::Degenerate));
    }

    #[test]
    fn cubic_perturbation_residual_vanishes_to_truncation() {
        let mut phi = Series3::new(6);
        phi.add_term((2, 0, 0), 0.5);
        phi.add_term((0, 2, 0), 0.5);
        phi.add_term((1, 0, 1), -1.0);
        phi.add_term((0, 1, 1), -1.0);
        phi.add_term((0, 0, 2), 0.8);
        phi.add_term((1, 1, 1), 0.3);
        phi.add_term((0, 0, 3), -0.2);
        phi.add_term((2, 0, 2), 0.7);
        phi.add_term((0, 0, 4), 0.1);
        let s = implicit_eliminate(&phi).unwrap();
        let residual = phi.derivative(2).substitute_s(&s);
        for k in 0..=5 {
            assert!(residual.homogeneous_part(k).norm() < 1e-13, "degree {k}");
        }
    }

    #[test]
    fn symplectic_residual_of_linear_map() {
        let m = [[Complex64::new(0.2, 0.0), Complex64::new(-1.0, 0.0)], [Complex64::new(0.96, 0.0), Complex64::new(0.2, 0.0)]];
        let lin = SeriesMap::linear(Basis::YEta, 5, m);
        assert!(lin.symplecticity_residual().norm() < 1e-15);
    }
}

//! Weyl calculus on polynomial symbols.
//!
//! For a basis with `{u, v} = c` the Moyal product at `ħ` is
//! `a ⋆ b = a · exp((iħc/2)(←∂u →∂v − ←∂v →∂u)) · b`, which terminates on
//! polynomials.

use num_complex::Complex64;
use num_rational::Rational32;

use super::{binomial, Coeff, Poly2};
use crate::error::{Error, Result};

fn moyal_order<C: Coeff>(a: &Poly2<C>, b: &Poly2<C>, k: u32) -> Poly2<C> {
    let mut out = a.empty_like();
    for l in 0..=k {
        let da = a.derivative(k - l, l);
        if da.is_zero() {
            continue;
        }
        let db = b.derivative(l, k - l);
        if db.is_zero() {
            continue;
        }
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        out = out.add(&da.mul(&db).scale(Complex64::new(sign * binomial(k, l), 0.0)));
    }
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, v| acc * v as f64)
}

/// Moyal product at a given `ħ`.
pub fn moyal_product_with<C: Coeff>(a: &Poly2<C>, b: &Poly2<C>, hbar: f64) -> Result<Poly2<C>> {
    if a.basis() != b.basis() {
        return Err(Error::BasisMismatch(a.basis(), b.basis()));
    }
    let kappa = Complex64::new(0.0, 0.5 * hbar) * a.basis().bracket();
    let kmax = a.degree().min(b.degree());
    let mut out = a.empty_like().with_max_degree(a.max_degree().min(b.max_degree()));
    for k in 0..=kmax {
        let t = moyal_order(a, b, k);
        if !t.is_zero() {
            out = out.add(&t.scale(kappa.powu(k) / factorial(k)));
        }
    }
    Ok(out)
}

/// Moyal product at `ħ = 1`.
pub fn moyal_product<C: Coeff>(a: &Poly2<C>, b: &Poly2<C>) -> Poly2<C> {
    moyal_product_with(a, b, 1.0).unwrap_or_else(|e| panic!("{e}"))
}

/// Commutator symbol split by Moyal order, each part tagged with its power of `N`.
///
/// The Poisson term `i{f, g}` carries `N^0`. The `j`-th correction (Moyal
/// order `2j + 1`, i.e. `2j` extra derivatives on each factor) carries
/// `N^{−2j·w}` where `w` is the `ħ` weight of one transverse derivative
/// pair in the isotropic grading (`½` when `y` and `D_y` both have order `½`).
#[derive(Debug, Clone, PartialEq)]
pub struct MoyalCommutator<C: Coeff = Complex64> {
    pub terms: Vec<(Rational32, Poly2<C>)>,
}

impl<C: Coeff> MoyalCommutator<C> {
    pub fn sum(&self) -> Option<Poly2<C>> {
        let mut it = self.terms.iter();
        let first = it.next()?.1.clone();
        Some(it.fold(first, |acc, (_, p)| acc.add(p)))
    }

    /// The `N^0` part, `i{f, g}`.
    pub fn leading(&self) -> Option<&Poly2<C>> {
        self.terms.iter().find(|(p, _)| *p == Rational32::from_integer(0)).map(|(_, t)| t)
    }

    /// Everything except the leading term.
    pub fn corrections(&self) -> impl Iterator<Item = &(Rational32, Poly2<C>)> {
        self.terms.iter().filter(|(p, _)| *p != Rational32::from_integer(0))
    }
}

/// `f ⋆ g − g ⋆ f` at `ħ = 1`, with the power-of-`N` ledger described on [`MoyalCommutator`].
pub fn moyal_commutator<C: Coeff>(f: &Poly2<C>, g: &Poly2<C>, hbar_weight: Rational32) -> Result<MoyalCommutator<C>> {
    if f.basis() != g.basis() {
        return Err(Error::BasisMismatch(f.basis(), g.basis()));
    }
    let kappa = Complex64::new(0.0, 0.5) * f.basis().bracket();
    let kmax = f.degree().min(g.degree());
    let mut terms = Vec::new();
    let mut k = 1;
    while k <= kmax {
        let t = moyal_order(f, g, k);
        let j = ((k - 1) / 2) as i32;
        let power = -hbar_weight * Rational32::from_integer(2 * j);
        terms.push((power, t.scale(kappa.powu(k) * (2.0 / factorial(k)))));
        k += 2;
    }
    if terms.is_empty() {
        terms.push((Rational32::from_integer(0), f.empty_like()));
    }
    Ok(MoyalCommutator { terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Basis;
    use nalgebra::DMatrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn half() -> Rational32 {
        Rational32::new(1, 2)
    }

    #[test]
    fn canonical_commutator() {
        let y = Poly2::coordinate(Basis::YEta, 6, true);
        let eta = Poly2::coordinate(Basis::YEta, 6, false);
        let com = moyal_commutator(&y, &eta, half()).unwrap().sum().unwrap();
        assert_eq!(com, Poly2::constant(Basis::YEta, 6, Complex64::new(0.0, 1.0)));
    }

    #[test]
    fn leading_term_is_i_poisson() {
        for basis in [Basis::YEta, Basis::ZZbar, Basis::WWbar] {
            let ie = Basis::YEta.action(6).to_basis(basis);
            let y2 = Poly2::monomial(Basis::YEta, 6, 2, 0, c(1.0)).to_basis(basis);
            let com = moyal_commutator(&ie, &y2, half()).unwrap();
            let expect = ie.poisson(&y2).scale(Complex64::new(0.0, 1.0));
            assert!(com.leading().unwrap().distance(&expect) < 1e-14);
            // quadratic symbols: the Moyal series stops at the Poisson term
            assert!(com.corrections().all(|(_, p)| p.norm() < 1e-14));
        }
    }

    #[test]
    fn corrections_carry_negative_n_powers() {
        let f = Poly2::from_terms(Basis::YEta, 8, [((3, 0), c(1.0)), ((1, 2), c(0.5))]);
        let g = Poly2::from_terms(Basis::YEta, 8, [((0, 3), c(1.0)), ((2, 2), c(-1.0))]);
        let com = moyal_commutator(&f, &g, half()).unwrap();
        let diff = com.sum().unwrap().sub(&f.poisson(&g).scale(Complex64::new(0.0, 1.0)));
        assert!(diff.norm() > 0.0);
        let corr = com
            .corrections()
            .fold(diff.empty_like(), |acc, (p, t)| {
                assert!(*p <= Rational32::from_integer(-1));
                acc.add(t)
            });
        assert!(diff.distance(&corr) < 1e-13);
    }

    /// Weyl quantization of `y^a η^b` by McCoy's rule `2^{-a} Σ C(a,k) Y^k P^b Y^{a−k}`.
    fn weyl(p: &Poly2, y: &DMatrix<Complex64>, pm: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let n = y.nrows();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        let id = DMatrix::<Complex64>::identity(n, n);
        let pow = |m: &DMatrix<Complex64>, k: u32| (0..k).fold(id.clone(), |acc, _| &acc * m);
        for (&(a, b), coeff) in p.terms() {
            let pb = pow(pm, b);
            let mut sym = DMatrix::<Complex64>::zeros(n, n);
            for k in 0..=a {
                sym += (pow(y, k) * &pb * pow(y, a - k)) * c(binomial(a, k));
            }
            out += sym * (*coeff / 2f64.powi(a as i32));
        }
        out
    }

    #[test]
    fn cubic_commutator_matches_oscillator_matrices() {
        let n = 40;
        let mut a = DMatrix::<Complex64>::zeros(n, n);
        for k in 1..n {
            a[(k - 1, k)] = c((k as f64).sqrt());
        }
        let ad = a.adjoint();
        let s2 = std::f64::consts::SQRT_2;
        let y = (&a + &ad) * c(1.0 / s2);
        let pm = (&a - &ad) * Complex64::new(0.0, -1.0 / s2);
        let y3 = &y * &y * &y;
        let p3 = &pm * &pm * &pm;
        let exact = &y3 * &p3 - &p3 * &y3;
        let f = Poly2::monomial(Basis::YEta, 6, 3, 0, c(1.0));
        let g = Poly2::monomial(Basis::YEta, 6, 0, 3, c(1.0));
        let sym = moyal_commutator(&f, &g, half()).unwrap().sum().unwrap();
        let quant = weyl(&sym, &y, &pm);
        let block = n - 8;
        let mut err: f64 = 0.0;
        for i in 0..block {
            for j in 0..block {
                err = err.max((exact[(i, j)] - quant[(i, j)]).norm());
            }
        }
        assert!(err < 1e-9, "max deviation {err}");
        // the z-basis computation gives the same symbol
        let fz = f.to_zzbar();
        let gz = g.to_zzbar();
        let symz = moyal_commutator(&fz, &gz, half()).unwrap().sum().unwrap().to_yeta();
        assert!(symz.distance(&sym) < 1e-12);
    }

    #[test]
    fn star_product_is_associative() {
        let f = Poly2::from_terms(Basis::ZZbar, 9, [((2, 1), c(1.0)), ((0, 1), Complex64::new(0.0, 2.0))]);
        let g = Poly2::from_terms(Basis::ZZbar, 9, [((1, 2), c(-1.0)), ((3, 0), c(0.5))]);
        let h = Poly2::from_terms(Basis::ZZbar, 9, [((1, 1), c(2.0)), ((0, 2), c(1.0))]);
        let l = moyal_product(&moyal_product(&f, &g), &h);
        let r = moyal_product(&f, &moyal_product(&g, &h));
        assert!(l.distance(&r) < 1e-12);
    }
}

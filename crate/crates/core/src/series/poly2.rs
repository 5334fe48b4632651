use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{falling, Basis, Coeff};
use crate::error::{Error, Result};

/// Truncated bivariate polynomial `Σ c_{mn} u^m v^n` in the coordinates of a [`Basis`].
#[derive(Clone, Debug, PartialEq)]
pub struct Poly2<C: Coeff = Complex64> {
    terms: BTreeMap<(u32, u32), C>,
    basis: Basis,
    max_degree: u32,
    prune: f64,
}

impl<C: Coeff> Poly2<C> {
    pub fn new(basis: Basis, max_degree: u32) -> Self {
        Self { terms: BTreeMap::new(), basis, max_degree, prune: 0.0 }
    }

    /// Coefficients with magnitude at or below `threshold` are dropped on insertion.
    pub fn with_prune(mut self, threshold: f64) -> Self {
        self.prune = threshold;
        self.terms.retain(|_, c| c.magnitude() > threshold);
        self
    }

    pub fn monomial(basis: Basis, max_degree: u32, m: u32, n: u32, c: C) -> Self {
        let mut p = Self::new(basis, max_degree);
        p.add_term(m, n, c);
        p
    }

    pub fn from_terms(basis: Basis, max_degree: u32, terms: impl IntoIterator<Item = ((u32, u32), C)>) -> Self {
        let mut p = Self::new(basis, max_degree);
        for ((m, n), c) in terms {
            p.add_term(m, n, c);
        }
        p
    }

    /// Empty polynomial with the same basis, truncation and prune threshold.
    pub fn empty_like(&self) -> Self {
        Self { terms: BTreeMap::new(), basis: self.basis, max_degree: self.max_degree, prune: self.prune }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn prune_threshold(&self) -> f64 {
        self.prune
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), C> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<(u32, u32), C> {
        self.terms
    }

    pub fn get(&self, m: u32, n: u32) -> Option<&C> {
        self.terms.get(&(m, n))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest total degree present (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|(m, n)| m + n).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(m, n)| m + n).min()
    }

    /// Adds `c·u^m v^n`; terms beyond the truncation order are discarded.
    pub fn add_term(&mut self, m: u32, n: u32, c: C) {
        if m + n > self.max_degree {
            return;
        }
        let merged = match self.terms.remove(&(m, n)) {
            Some(old) => old.add(&c),
            None => c,
        };
        if merged.magnitude() > self.prune {
            self.terms.insert((m, n), merged);
        }
    }

    pub fn map_coeffs(&self, f: impl Fn((u32, u32), &C) -> C) -> Self {
        let mut out = self.empty_like();
        for (&k, c) in &self.terms {
            out.add_term(k.0, k.1, f(k, c));
        }
        out
    }

    /// Keeps only the monomials for which `keep` holds.
    pub fn filter(&self, keep: impl Fn((u32, u32), &C) -> bool) -> Self {
        let mut out = self.empty_like();
        for (&k, c) in &self.terms {
            if keep(k, c) {
                out.terms.insert(k, c.clone());
            }
        }
        out
    }

    pub fn homogeneous_part(&self, degree: u32) -> Self {
        self.filter(|(m, n), _| m + n == degree)
    }

    pub fn truncated(&self, max_degree: u32) -> Self {
        let mut out = self.filter(|(m, n), _| m + n <= max_degree);
        out.max_degree = max_degree;
        out
    }

    pub fn with_max_degree(mut self, max_degree: u32) -> Self {
        self.max_degree = max_degree;
        self.terms.retain(|(m, n), _| m + n <= max_degree);
        self
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch(self.basis, other.basis));
        }
        Ok(())
    }

    fn assert_same(&self, other: &Self) {
        if let Err(e) = self.check(other) {
            panic!("{e}");
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same(other);
        let mut out = self.clone();
        out.max_degree = self.max_degree.min(other.max_degree);
        out.terms.retain(|(m, n), _| m + n <= out.max_degree);
        for (&(m, n), c) in &other.terms {
            out.add_term(m, n, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_coeffs(|_, v| v.scale(c))
    }

    /// Multiplies every coefficient by the same coefficient-ring element.
    pub fn scale_by(&self, c: &C) -> Self {
        self.map_coeffs(|_, v| v.mul(c))
    }

    /// Graded product truncated at the smaller of the two truncation orders.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let mut out = self.empty_like();
        out.max_degree = self.max_degree.min(other.max_degree);
        for (&(m1, n1), c1) in &self.terms {
            for (&(m2, n2), c2) in &other.terms {
                out.add_term(m1 + m2, n1 + n2, c1.mul(c2));
            }
        }
        Ok(out)
    }

    /// Like [`Poly2::try_mul`], panicking on a basis mismatch.
    pub fn mul(&self, other: &Self) -> Self {
        self.try_mul(other).unwrap_or_else(|e| panic!("{e}"))
    }

    /// `∂^du_u ∂^dv_v` of the polynomial.
    pub fn derivative(&self, du: u32, dv: u32) -> Self {
        let mut out = self.empty_like();
        for (&(m, n), c) in &self.terms {
            if m >= du && n >= dv {
                let f = falling(m, du) * falling(n, dv);
                out.add_term(m - du, n - dv, c.scale(Complex64::new(f, 0.0)));
            }
        }
        out
    }

    /// Canonical Poisson bracket `{self, other}` in the induced form of the basis.
    pub fn try_poisson(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        let a_u = self.derivative(1, 0);
        let a_v = self.derivative(0, 1);
        let b_u = other.derivative(1, 0);
        let b_v = other.derivative(0, 1);
        Ok(a_u.mul(&b_v).sub(&a_v.mul(&b_u)).scale(self.basis.bracket()))
    }

    pub fn poisson(&self, other: &Self) -> Self {
        self.try_poisson(other).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Bracket for coordinates with `{u, v} = omega`, ignoring the basis tag.
    pub fn poisson_with(&self, other: &Self, omega: Complex64) -> Self {
        let a_u = self.derivative(1, 0);
        let a_v = self.derivative(0, 1);
        let b_u = other.derivative(1, 0);
        let b_v = other.derivative(0, 1);
        a_u.mul(&b_v).sub(&a_v.mul(&b_u)).scale(omega)
    }

    /// Substitutes `u → k00 u' + k01 v'`, `v → k10 u' + k11 v'` and retags with `target`.
    pub fn linear_substitute(&self, k: [[Complex64; 2]; 2], target: Basis) -> Self {
        let deg = self.degree() as usize;
        let lin_pow = |row: [Complex64; 2]| -> Vec<Vec<Complex64>> {
            let mut pows = vec![vec![Complex64::new(1.0, 0.0)]];
            for p in 1..=deg {
                let prev = &pows[p - 1];
                let mut next = vec![Complex64::new(0.0, 0.0); p + 1];
                for (i, c) in prev.iter().enumerate() {
                    next[i] += c * row[0];
                    next[i + 1] += c * row[1];
                }
                pows.push(next);
            }
            pows
        };
        let pu = lin_pow(k[0]);
        let pv = lin_pow(k[1]);
        let mut out = Self::new(target, self.max_degree);
        out.prune = self.prune;
        let mut acc: BTreeMap<(u32, u32), C> = BTreeMap::new();
        for (&(m, n), c) in &self.terms {
            let a = &pu[m as usize];
            let b = &pv[n as usize];
            for (i, ca) in a.iter().enumerate() {
                for (j, cb) in b.iter().enumerate() {
                    let w = ca * cb;
                    if w == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    // exponent of v' is i + j, of u' the rest
                    let ev = (i + j) as u32;
                    let eu = m + n - ev;
                    let term = c.scale(w);
                    let entry = acc.remove(&(eu, ev));
                    acc.insert((eu, ev), match entry {
                        Some(old) => old.add(&term),
                        None => term,
                    });
                }
            }
        }
        for ((m, n), c) in acc {
            out.add_term(m, n, c);
        }
        out
    }

    /// Rewrites the polynomial in another coordinate basis.
    pub fn to_basis(&self, target: Basis) -> Self {
        if target == self.basis {
            return self.clone();
        }
        let m = self.basis.from_yeta();
        let n = target.to_yeta();
        let mut k = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                k[i][j] = m[i][0] * n[0][j] + m[i][1] * n[1][j];
            }
        }
        self.linear_substitute(k, target)
    }

    pub fn to_yeta(&self) -> Self {
        self.to_basis(Basis::YEta)
    }

    pub fn to_zzbar(&self) -> Self {
        self.to_basis(Basis::ZZbar)
    }

    pub fn to_wwbar(&self) -> Self {
        self.to_basis(Basis::WWbar)
    }

    /// Largest coefficient magnitude.
    pub fn norm(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.magnitude()))
    }

    /// Whether every monomial has total degree of the given parity.
    pub fn has_parity(&self, odd: bool) -> bool {
        self.terms.keys().all(|(m, n)| ((m + n) % 2 == 1) == odd)
    }

    /// Swaps the roles of the two coordinates and conjugates the coefficients.
    pub fn swap_conj(&self) -> Self {
        let mut out = self.empty_like();
        for (&(m, n), c) in &self.terms {
            out.add_term(n, m, c.conj());
        }
        out
    }
}

impl Poly2<Complex64> {
    pub fn constant(basis: Basis, max_degree: u32, c: Complex64) -> Self {
        Self::monomial(basis, max_degree, 0, 0, c)
    }

    pub fn one(basis: Basis, max_degree: u32) -> Self {
        Self::constant(basis, max_degree, Complex64::new(1.0, 0.0))
    }

    /// Coordinate function `u` (`first = true`) or `v`.
    pub fn coordinate(basis: Basis, max_degree: u32, first: bool) -> Self {
        if first {
            Self::monomial(basis, max_degree, 1, 0, Complex64::new(1.0, 0.0))
        } else {
            Self::monomial(basis, max_degree, 0, 1, Complex64::new(1.0, 0.0))
        }
    }

    pub fn coeff(&self, m: u32, n: u32) -> Complex64 {
        self.get(m, n).copied().unwrap_or_default()
    }

    pub fn eval(&self, u: Complex64, v: Complex64) -> Complex64 {
        self.terms()
            .iter()
            .map(|(&(m, n), c)| c * u.powu(m) * v.powu(n))
            .sum()
    }

    /// Integer power with the unit polynomial for `k = 0`.
    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one(self.basis(), self.max_degree());
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Substitutes `u → p`, `v → q` (series composition; `p`, `q` without constant terms).
    pub fn compose(&self, p: &Self, q: &Self) -> Self {
        let d = self.max_degree().min(p.max_degree()).min(q.max_degree());
        let p = p.truncated(d);
        let q = q.truncated(d);
        let deg = self.degree();
        let mut pp = vec![Self::one(p.basis(), d)];
        let mut qp = vec![Self::one(p.basis(), d)];
        for i in 1..=deg as usize {
            pp.push(pp[i - 1].mul(&p));
            qp.push(qp[i - 1].mul(&q));
        }
        let mut out = Self::new(p.basis(), d);
        for (&(m, n), c) in self.terms() {
            let t = pp[m as usize].mul(&qp[n as usize]).scale(*c);
            out = out.add(&t);
        }
        out
    }

    /// Largest `|Im c|` over all coefficients.
    pub fn max_imag(&self) -> f64 {
        self.terms().values().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    /// Coefficient-wise distance to another polynomial.
    pub fn distance(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }
}

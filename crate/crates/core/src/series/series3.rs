use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{Basis, Poly2};

/// Truncated real series in `(x, x₁, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series3 {
    terms: BTreeMap<(u32, u32, u32), f64>,
    max_degree: u32,
}

impl Series3 {
    pub fn new(max_degree: u32) -> Self {
        Self { terms: BTreeMap::new(), max_degree }
    }

    pub fn constant(max_degree: u32, c: f64) -> Self {
        let mut p = Self::new(max_degree);
        p.add_term((0, 0, 0), c);
        p
    }

    /// The variable `x` (0), `x₁` (1) or `s` (2).
    pub fn var(max_degree: u32, which: usize) -> Self {
        let mut e = [0u32; 3];
        e[which] = 1;
        let mut p = Self::new(max_degree);
        p.add_term((e[0], e[1], e[2]), 1.0);
        p
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32, u32), f64> {
        &self.terms
    }

    pub fn coeff(&self, e: (u32, u32, u32)) -> f64 {
        self.terms.get(&e).copied().unwrap_or(0.0)
    }

    pub fn add_term(&mut self, e: (u32, u32, u32), c: f64) {
        if e.0 + e.1 + e.2 > self.max_degree {
            return;
        }
        let v = self.terms.remove(&e).unwrap_or(0.0) + c;
        if v != 0.0 {
            self.terms.insert(e, v);
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        out.max_degree = self.max_degree.min(o.max_degree);
        out.terms.retain(|e, _| e.0 + e.1 + e.2 <= out.max_degree);
        for (&e, &c) in &o.terms {
            out.add_term(e, c);
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::new(self.max_degree);
        for (&e, &v) in &self.terms {
            out.add_term(e, v * c);
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::new(self.max_degree.min(o.max_degree));
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &o.terms {
                out.add_term((a.0 + b.0, a.1 + b.1, a.2 + b.2), ca * cb);
            }
        }
        out
    }

    pub fn powi(&self, k: u32) -> Self {
        (0..k).fold(Self::constant(self.max_degree, 1.0), |acc, _| acc.mul(self))
    }

    /// Partial derivative in variable `which` (0 = x, 1 = x₁, 2 = s).
    pub fn derivative(&self, which: usize) -> Self {
        let mut out = Self::new(self.max_degree);
        for (&e, &c) in &self.terms {
            let mut v = [e.0, e.1, e.2];
            if v[which] == 0 {
                continue;
            }
            let f = v[which] as f64;
            v[which] -= 1;
            out.add_term((v[0], v[1], v[2]), c * f);
        }
        out
    }

    /// Degree-`k` homogeneous slice.
    pub fn homogeneous_part(&self, k: u32) -> Self {
        let mut out = Self::new(self.max_degree);
        for (&e, &c) in &self.terms {
            if e.0 + e.1 + e.2 == k {
                out.add_term(e, c);
            }
        }
        out
    }

    pub fn eval(&self, x: f64, x1: f64, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|(&(a, b, c), &v)| v * x.powi(a as i32) * x1.powi(b as i32) * s.powi(c as i32))
            .sum()
    }

    /// `Σ_k c_k u^k` for a series `u` without constant term.
    pub fn compose_univariate(&self, coeffs: &[f64]) -> Self {
        debug_assert_eq!(self.coeff((0, 0, 0)), 0.0);
        let mut out = Self::new(self.max_degree);
        let mut pow = Self::constant(self.max_degree, 1.0);
        for (k, &c) in coeffs.iter().enumerate() {
            if k > 0 {
                pow = pow.mul(self);
                if pow.terms.is_empty() {
                    break;
                }
            }
            out = out.add(&pow.scale(c));
        }
        out
    }

    /// Substitutes `s = S(x, x₁)` and returns the result as a polynomial in `(x, x₁)`.
    ///
    /// The result is tagged `Basis::YEta`, which here only names the two
    /// variables' slots.
    pub fn substitute_s(&self, s_star: &Poly2) -> Poly2 {
        let d = self.max_degree.min(s_star.max_degree());
        let s_star = s_star.truncated(d);
        let max_s = self.terms.keys().map(|e| e.2).max().unwrap_or(0);
        let mut spow = vec![Poly2::one(Basis::YEta, d)];
        for i in 1..=max_s as usize {
            spow.push(spow[i - 1].mul(&s_star));
        }
        let mut out = Poly2::new(Basis::YEta, d);
        for (&(a, b, c), &v) in &self.terms {
            let mono = Poly2::monomial(Basis::YEta, d, a, b, Complex64::new(v, 0.0));
            out = out.add(&mono.mul(&spow[c as usize]));
        }
        out
    }
}

/// Taylor coefficients of `(1 + u)^{1/2}` up to order `k`.
pub(crate) fn sqrt_one_plus(k: usize) -> Vec<f64> {
    let mut c = vec![1.0];
    for j in 1..=k {
        let prev = c[j - 1];
        c.push(prev * (0.5 - (j - 1) as f64) / j as f64);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s3_strategy() -> impl Strategy<Value = Series3> {
        proptest::collection::vec((0u32..3, 0u32..3, 0u32..3, -3i32..=3), 0..6).prop_map(|v| {
            let mut p = Series3::new(6);
            for (a, b, c, k) in v {
                p.add_term((a, b, c), k as f64);
            }
            p
        })
    }

    #[test]
    fn grading_is_exact() {
        let x = Series3::var(6, 0);
        let s = Series3::var(6, 2);
        let p = x.add(&s).powi(3);
        assert_eq!(p.coeff((1, 0, 2)), 3.0);
        let q = p.mul(&p);
        assert_eq!(q.coeff((3, 0, 3)), 20.0);
        assert!(q.terms().keys().all(|e| e.0 + e.1 + e.2 == 6));
    }

    #[test]
    fn sqrt_series_matches() {
        let x = Series3::var(8, 0);
        let r = x.compose_univariate(&sqrt_one_plus(8));
        for &t in &[0.01, 0.05] {
            assert!((r.eval(t, 0.0, 0.0) - (1.0 + t).sqrt()).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn ring_axioms(a in s3_strategy(), b in s3_strategy(), c in s3_strategy()) {
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }
    }
}

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Case;
use crate::error::{Error, Result};
use num_rational::Rational32;

use crate::series::{binomial, moyal_commutator, moyal_product, ChebGrid, Poly2, SFun};

/// Truncation degree carried by every transverse polynomial in the engine.
pub(crate) const MAX_DEGREE: u32 = 64;

/// Coefficient of one perturbation term as written in a jet file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum CoeffSpec {
    Const {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    /// `Σ_k cos[k]·cos(πks/L) + sin[k]·sin(πks/L)`.
    Fourier {
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
    /// Values at the Chebyshev–Lobatto nodes `s_j = ½L(1 − cos(πj/n))`.
    Samples {
        re: Vec<f64>,
        #[serde(default)]
        im: Vec<f64>,
    },
}

impl CoeffSpec {
    pub fn to_sfun(&self, grid: &Arc<ChebGrid>) -> Result<SFun> {
        let l = grid.length();
        match self {
            CoeffSpec::Const { re, im } => Ok(SFun::constant(grid, Complex64::new(*re, *im))),
            CoeffSpec::Fourier { cos, sin } => Ok(SFun::from_real_fn(grid, |s| {
                let c: f64 = cos.iter().enumerate().map(|(k, a)| a * (PI * k as f64 * s / l).cos()).sum();
                let d: f64 = sin.iter().enumerate().map(|(k, a)| a * (PI * k as f64 * s / l).sin()).sum();
                c + d
            })),
            CoeffSpec::Samples { re, im } => {
                if re.len() < 3 || !(im.is_empty() || im.len() == re.len()) {
                    return Err(Error::InvalidInput(format!(
                        "samples need at least 3 values and matching re/im lengths (got {} and {})",
                        re.len(),
                        im.len()
                    )));
                }
                let src = ChebGrid::new(re.len(), l);
                let vals = re.iter().enumerate().map(|(j, &x)| Complex64::new(x, im.get(j).copied().unwrap_or(0.0))).collect();
                let f = SFun::from_values(src, vals);
                Ok(if re.len() == grid.len() { SFun::from_values(grid.clone(), f.values().to_vec()) } else { f.resample(grid) })
            }
        }
    }

    pub fn from_sfun(f: &SFun) -> Self {
        CoeffSpec::Samples { re: f.values().iter().map(|v| v.re).collect(), im: f.values().iter().map(|v| v.im).collect() }
    }
}

/// One term `N^{4−m} · c(s) u^p v^q · R^k` of a jet file, `(u, v)` the complex
/// basis of the case (`z, z̄` or `w, w̄`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub m: u32,
    pub monomial: [u32; 2],
    #[serde(default)]
    pub r_power: u32,
    pub coeff: CoeffSpec,
}

/// Serialized form of a [`SymbolJet`].
///
/// Either `alpha` (the jet is already linearized) or `radii = [R_A, R_B]`
/// (straighten first, then linearize) must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetSpec {
    pub case: Case,
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii: Option<[f64; 2]>,
    pub terms: Vec<TermSpec>,
}

pub(crate) type Terms = BTreeMap<(u32, u32), Poly2<SFun>>;

/// Perturbation of the model operator `2N²R`, `R = D_s + (α/L)Î`, stored as
/// `Σ_m N^{4−m} Σ_k X_{m,k}(s; u, v) R^k` in Weyl symbols.
///
/// Levels start at `m = 3`; the level-2 part is the model operator itself.
#[derive(Debug, Clone)]
pub struct SymbolJet {
    pub case: Case,
    pub alpha: f64,
    pub length: f64,
    grid: Arc<ChebGrid>,
    terms: Terms,
}

impl SymbolJet {
    pub fn new(case: Case, alpha: f64, length: f64, nodes: usize) -> Self {
        Self::on_grid(case, alpha, ChebGrid::new(nodes, length))
    }

    pub fn on_grid(case: Case, alpha: f64, grid: Arc<ChebGrid>) -> Self {
        Self { case, alpha, length: grid.length(), grid, terms: Terms::new() }
    }

    pub fn grid(&self) -> &Arc<ChebGrid> {
        &self.grid
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), Poly2<SFun>> {
        &self.terms
    }

    pub fn is_empty(&self) -> bool {
        self.terms.values().all(|p| p.is_zero())
    }

    /// The transverse polynomial at level `m` and `R`-power `k`.
    pub fn level(&self, m: u32, k: u32) -> Option<&Poly2<SFun>> {
        self.terms.get(&(m, k))
    }

    pub fn max_level(&self) -> u32 {
        self.terms.keys().map(|k| k.0).max().unwrap_or(2)
    }

    fn empty_poly(&self) -> Poly2<SFun> {
        Poly2::new(self.case.basis(), MAX_DEGREE)
    }

    /// Adds `c(s) u^a v^b R^k` at level `m`, checking the filtration:
    /// `m ≥ 3`, `a + b ≤ m − 2k` and `a + b ≡ m (mod 2)`.
    pub fn add_term(&mut self, m: u32, k: u32, (a, b): (u32, u32), c: SFun) -> Result<()> {
        if m < 3 {
            return Err(Error::InvalidInput(format!("level {m} below 3; level 2 is the model operator")));
        }
        if a + b + 2 * k > m || (a + b) % 2 != m % 2 {
            return Err(Error::InvalidInput(format!("monomial ({a},{b})·R^{k} not admissible at level {m}")));
        }
        if c.grid().len() != self.grid.len() || c.length() != self.length {
            return Err(Error::InvalidInput("coefficient grid differs from the jet grid".into()));
        }
        let mut p = self.terms.remove(&(m, k)).unwrap_or_else(|| self.empty_poly());
        p.add_term(a, b, c);
        if !p.is_zero() {
            self.terms.insert((m, k), p);
        }
        Ok(())
    }

    /// Constant-coefficient term.
    pub fn add_const(&mut self, m: u32, k: u32, mono: (u32, u32), c: Complex64) -> Result<()> {
        let f = SFun::constant(&self.grid, c);
        self.add_term(m, k, mono, f)
    }

    pub fn from_spec(spec: &JetSpec, nodes: usize) -> Result<Self> {
        let alpha = spec.alpha.ok_or_else(|| Error::InvalidInput("jet needs alpha (or radii, via the straightening)".into()))?;
        Self::from_terms(spec.case, alpha, spec.length, nodes, &spec.terms)
    }

    pub fn from_terms(case: Case, alpha: f64, length: f64, nodes: usize, terms: &[TermSpec]) -> Result<Self> {
        if !(length > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput("need L > 0 and finite alpha".into()));
        }
        let mut jet = Self::new(case, alpha, length, nodes);
        for t in terms {
            let c = t.coeff.to_sfun(&jet.grid)?;
            jet.add_term(t.m, t.r_power, (t.monomial[0], t.monomial[1]), c)?;
        }
        Ok(jet)
    }

    pub fn to_spec(&self) -> JetSpec {
        let mut terms = Vec::new();
        for (&(m, k), p) in &self.terms {
            for (&(a, b), c) in p.terms() {
                terms.push(TermSpec { m, monomial: [a, b], r_power: k, coeff: CoeffSpec::from_sfun(c) });
            }
        }
        JetSpec { case: self.case, length: self.length, alpha: Some(self.alpha), radii: None, terms }
    }

    /// Same jet with every coefficient replaced by `f(m, k, (a, b), c)`.
    pub fn map_coeffs(&self, f: impl Fn(u32, u32, (u32, u32), &SFun) -> SFun) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(&(m, k), p)| ((m, k), p.map_coeffs(|mono, c| f(m, k, mono, c))))
            .filter(|(_, p)| !p.is_zero())
            .collect();
        Self { terms, ..self.clone() }
    }

    pub(crate) fn algebra(&self) -> Algebra {
        Algebra { case: self.case, rate: self.alpha / self.length, max_level: u32::MAX }
    }

    pub(crate) fn with_model(&self) -> Terms {
        let mut t = self.terms.clone();
        t.insert((2, 1), Poly2::monomial(self.case.basis(), MAX_DEGREE, 0, 0, SFun::constant(&self.grid, Complex64::new(2.0, 0.0))));
        t
    }

    pub(crate) fn replace_terms(&self, mut t: Terms) -> Self {
        t.remove(&(2, 1));
        t.retain(|_, p| !p.is_zero());
        Self { terms: t, ..self.clone() }
    }

    /// `e^{sign·ad_G}` applied to the full operator `2N²R + X`, keeping levels
    /// up to `max_level`.
    ///
    /// `generator` holds `G` with the same level convention (a term at level
    /// `m` carries `N^{4−m}`).
    pub fn conjugated(&self, generator: &SymbolJet, sign: f64, max_level: u32) -> Result<Self> {
        if generator.case != self.case || generator.grid.len() != self.grid.len() || generator.length != self.length {
            return Err(Error::InvalidInput("generator and jet live on different grids or cases".into()));
        }
        let alg = Algebra { max_level, ..self.algebra() };
        let out = alg.exp_ad(&generator.terms, &self.with_model(), sign);
        Ok(self.replace_terms(out))
    }

    /// Largest coefficient size over all terms.
    pub fn norm(&self) -> f64 {
        self.terms.values().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// `max |X − Y|` over all terms.
    pub fn distance(&self, other: &SymbolJet) -> f64 {
        let mut keys: Vec<_> = self.terms.keys().chain(other.terms.keys()).copied().collect();
        keys.sort_unstable();
        keys.dedup();
        keys.iter()
            .map(|key| {
                let a = self.terms.get(key).cloned().unwrap_or_else(|| self.empty_poly());
                let b = other.terms.get(key).cloned().unwrap_or_else(|| self.empty_poly());
                a.sub(&b).norm()
            })
            .fold(0.0, f64::max)
    }
}

impl PartialEq for SymbolJet {
    fn eq(&self, other: &Self) -> bool {
        self.case == other.case && self.alpha == other.alpha && self.length == other.length && self.terms == other.terms
    }
}

/// `(u, v)`-polynomial complex conjugate of a real-phase-space symbol.
pub fn symbol_conj(p: &Poly2<SFun>, case: Case) -> Poly2<SFun> {
    match case {
        Case::Elliptic => p.swap_conj(),
        Case::Hyperbolic => p.map_coeffs(|_, c| c.conj()),
    }
}

/// Operator product rules in the `(level, R-power)` grading.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Algebra {
    pub case: Case,
    /// `α/L`.
    pub rate: f64,
    pub max_level: u32,
}

impl Algebra {
    /// `𝒟B = ∂_s B − (α/L){I, B}`, so that `[R, B] = −i𝒟B`.
    pub fn d(&self, p: &Poly2<SFun>) -> Poly2<SFun> {
        p.map_coeffs(|(a, b), c| {
            let w = self.case.bracket_factor(a, b) * self.rate;
            c.derivative().zip(c, |dc, v| dc - w * v)
        })
    }

    // only the commutator is needed outside tests, where the product checks it
    #[cfg(test)]
    /// `(A R^a)(B R^b) = Σ_l C(a,l) A⋆((−i𝒟)^l B) R^{a+b−l}`, level `m_A + m_B − 4`.
    pub fn product(&self, x: &Terms, y: &Terms) -> Terms {
        let mut out = Terms::new();
        let max_ka = x.keys().map(|k| k.1).max().unwrap_or(0);
        // (−i𝒟)^l of every right factor
        let mut ladder: Vec<Terms> = vec![y.clone()];
        for l in 1..=max_ka {
            let prev = &ladder[l as usize - 1];
            let next = prev.iter().map(|(&key, p)| (key, self.d(p).scale(Complex64::new(0.0, -1.0)))).collect();
            ladder.push(next);
        }
        for (&(ma, ka), pa) in x {
            for (&(mb, kb), _) in y {
                let level = ma + mb;
                if level < 4 || level - 4 > self.max_level {
                    continue;
                }
                for l in 0..=ka {
                    let pb = &ladder[l as usize][&(mb, kb)];
                    if pb.is_zero() {
                        continue;
                    }
                    let t = moyal_product(pa, pb).scale(Complex64::new(binomial(ka, l), 0.0));
                    accumulate(&mut out, (level - 4, ka + kb - l), t);
                }
            }
        }
        out
    }

    /// `[X, Y]`, with the `R`-free part of every pair taken from the odd Moyal
    /// orders only so that the even orders cancel exactly.
    pub fn commutator(&self, x: &Terms, y: &Terms) -> Terms {
        let ladder = |t: &Terms, kmax: u32| -> Vec<Terms> {
            let mut out: Vec<Terms> = vec![t.clone()];
            for l in 1..=kmax {
                let prev = &out[l as usize - 1];
                let next = prev.iter().map(|(&key, p)| (key, self.d(p).scale(Complex64::new(0.0, -1.0)))).collect();
                out.push(next);
            }
            out
        };
        let lx = ladder(x, y.keys().map(|k| k.1).max().unwrap_or(0));
        let ly = ladder(y, x.keys().map(|k| k.1).max().unwrap_or(0));
        let mut out = Terms::new();
        for (&(ma, ka), pa) in x {
            for (&(mb, kb), pb) in y {
                let level = ma + mb;
                if level < 4 || level - 4 > self.max_level {
                    continue;
                }
                let level = level - 4;
                let comm = moyal_commutator(pa, pb, Rational32::from_integer(0)).expect("same basis").sum();
                if let Some(c) = comm {
                    if !c.is_zero() {
                        accumulate(&mut out, (level, ka + kb), c);
                    }
                }
                for l in 1..=ka {
                    let d = &ly[l as usize][&(mb, kb)];
                    if !d.is_zero() {
                        let t = moyal_product(pa, d).scale(Complex64::new(binomial(ka, l), 0.0));
                        accumulate(&mut out, (level, ka + kb - l), t);
                    }
                }
                for l in 1..=kb {
                    let d = &lx[l as usize][&(ma, ka)];
                    if !d.is_zero() {
                        let t = moyal_product(pb, d).scale(Complex64::new(-binomial(kb, l), 0.0));
                        accumulate(&mut out, (level, ka + kb - l), t);
                    }
                }
            }
        }
        out.retain(|_, p| !p.is_zero());
        out
    }

    /// `Σ_n sign^n/n! ad_G^n X`.
    pub fn exp_ad(&self, g: &Terms, x: &Terms, sign: f64) -> Terms {
        let mut acc = x.clone();
        let mut term = x.clone();
        for n in 1.. {
            term = self.commutator(g, &term);
            if term.is_empty() {
                break;
            }
            let c = Complex64::new(sign / n as f64, 0.0);
            for p in term.values_mut() {
                *p = p.scale(c);
            }
            for (&key, p) in &term {
                accumulate(&mut acc, key, p.clone());
            }
        }
        acc.retain(|_, p| !p.is_zero());
        acc
    }
}

pub(crate) fn accumulate(t: &mut Terms, key: (u32, u32), p: Poly2<SFun>) {
    match t.remove(&key) {
        Some(old) => {
            let s = old.add(&p);
            t.insert(key, s);
        }
        None => {
            t.insert(key, p);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::DEFAULT_NODES;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn filtration_is_enforced() {
        let mut j = SymbolJet::new(Case::Elliptic, 1.0, 2.0, 33);
        assert!(j.add_const(3, 0, (2, 1), c(1.0, 0.0)).is_ok());
        assert!(j.add_const(3, 0, (2, 0), c(1.0, 0.0)).is_err());
        assert!(j.add_const(3, 1, (2, 1), c(1.0, 0.0)).is_err());
        assert!(j.add_const(4, 1, (1, 1), c(1.0, 0.0)).is_ok());
        assert!(j.add_const(2, 0, (1, 1), c(1.0, 0.0)).is_err());
    }

    #[test]
    fn spec_roundtrip_and_coefficient_forms() {
        let l = 2.0;
        let spec = JetSpec {
            case: Case::Elliptic,
            length: l,
            alpha: Some(0.9),
            radii: None,
            terms: vec![
                TermSpec { m: 4, monomial: [1, 1], r_power: 0, coeff: CoeffSpec::Fourier { cos: vec![0.5, 0.0, -0.5], sin: vec![] } },
                TermSpec { m: 3, monomial: [3, 0], r_power: 0, coeff: CoeffSpec::Const { re: 0.2, im: -0.1 } },
            ],
        };
        let jet = SymbolJet::from_spec(&spec, DEFAULT_NODES).unwrap();
        let f = jet.level(4, 0).unwrap().get(1, 1).unwrap();
        for (&s, v) in jet.grid().nodes().iter().zip(f.values()) {
            assert!((v.re - (PI * s / l).sin().powi(2)).abs() < 1e-14);
        }
        let back = SymbolJet::from_spec(&jet.to_spec(), DEFAULT_NODES).unwrap();
        assert_eq!(back.distance(&jet), 0.0);
        // resampling from a coarser sample grid
        let coarse = SymbolJet::from_spec(&jet.to_spec(), 65).unwrap();
        let fine = SymbolJet::from_spec(&coarse.to_spec(), DEFAULT_NODES).unwrap();
        assert!(fine.distance(&jet) < 1e-12);
    }

    #[test]
    fn model_commutator_is_minus_two_i_d() {
        // [2N²R, G] = −2i𝒟G one level below G
        let mut g = SymbolJet::new(Case::Elliptic, 0.7, 2.0, 65);
        let grid = g.grid().clone();
        g.add_term(5, 0, (2, 1), SFun::from_real_fn(&grid, |s| s * s)).unwrap();
        let alg = g.algebra();
        let model = SymbolJet::new(Case::Elliptic, 0.7, 2.0, 65).with_model();
        let comm = alg.commutator(&model, g.terms());
        assert_eq!(comm.len(), 1);
        let got = &comm[&(3, 0)];
        let rate = 0.7 / 2.0;
        let expect = SFun::from_fn(&grid, |s| Complex64::new(0.0, -2.0) * (Complex64::new(2.0 * s, 0.0) - Complex64::new(0.0, rate) * s * s));
        assert!(got.get(2, 1).unwrap().zip(&expect, |a, b| a - b).max_abs() < 1e-12);
    }

    #[test]
    fn conjugation_inverts() {
        let mut x = SymbolJet::new(Case::Hyperbolic, 0.5, 1.5, 33);
        let grid = x.grid().clone();
        x.add_term(3, 0, (1, 2), SFun::from_real_fn(&grid, |s| s.cos())).unwrap();
        x.add_const(4, 0, (2, 2), c(0.3, 0.0)).unwrap();
        x.add_const(4, 1, (1, 1), c(-0.1, 0.0)).unwrap();
        let mut g = SymbolJet::new(Case::Hyperbolic, 0.5, 1.5, 33);
        g.add_term(5, 0, (3, 0), SFun::from_real_fn(&grid, |s| s * (1.5 - s))).unwrap();
        g.add_const(6, 1, (1, 1), c(0.2, 0.0)).unwrap();
        let there = x.conjugated(&g, 1.0, 6).unwrap();
        assert!(there.distance(&x) > 1e-3);
        let back = there.conjugated(&g, -1.0, 6).unwrap();
        assert!(back.distance(&x) < 1e-11, "{}", back.distance(&x));
    }

    #[test]
    fn commutator_matches_product_difference() {
        let base = SymbolJet::new(Case::Elliptic, 0.4, 2.0, 33);
        let grid = base.grid().clone();
        let mut a = base.clone();
        a.add_term(5, 1, (1, 2), SFun::from_real_fn(&grid, |s| 1.0 + s)).unwrap();
        a.add_term(5, 0, (3, 2), SFun::from_real_fn(&grid, |s| s.cos())).unwrap();
        let mut b = base.clone();
        b.add_term(4, 1, (0, 2), SFun::from_real_fn(&grid, |s| (0.5 * s).sin())).unwrap();
        b.add_term(6, 2, (1, 1), SFun::from_real_fn(&grid, |s| s * s)).unwrap();
        let alg = base.algebra();
        let mut diff = alg.product(a.terms(), b.terms());
        for (key, p) in alg.product(b.terms(), a.terms()) {
            accumulate(&mut diff, key, p.neg());
        }
        let lhs = base.replace_terms(diff);
        let rhs = base.replace_terms(alg.commutator(a.terms(), b.terms()));
        assert!(lhs.distance(&rhs) < 1e-12, "{}", lhs.distance(&rhs));
    }

    #[test]
    fn weyl_r_product_is_associative() {
        let case = Case::Elliptic;
        let base = SymbolJet::new(case, 0.4, 2.0, 33);
        let grid = base.grid().clone();
        let mk = |m: u32, k: u32, mono: (u32, u32), f: fn(f64) -> f64| {
            let mut j = base.clone();
            j.add_term(m, k, mono, SFun::from_real_fn(&grid, f)).unwrap();
            j.terms
        };
        let a = mk(5, 1, (1, 2), |s| 1.0 + s);
        let b = mk(4, 1, (0, 2), |s| (0.5 * s).sin());
        let d = mk(3, 0, (2, 1), |s| s * s);
        let alg = base.algebra();
        let left = alg.product(&alg.product(&a, &b), &d);
        let right = alg.product(&a, &alg.product(&b, &d));
        let lj = base.replace_terms(left);
        let rj = base.replace_terms(right);
        assert!(lj.distance(&rj) < 1e-10, "{}", lj.distance(&rj));
    }
}

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bvp::solve_dirichlet;
use super::symbol::{symbol_conj, Algebra, SymbolJet, Terms, MAX_DEGREE};
use super::{Case, StraighteningData};
use crate::error::{Error, Result};
use crate::series::{Poly2, SFun};

/// Distance of `α(a−b)/π` to the integers below which the elliptic solve is refused.
pub const RESONANCE_TOL: f64 = 1e-8;

/// Conjugates the jet by the metaplectic family `exp(−iΦ(s)Î)`,
/// `Φ = ∫₀ˢ b₀₀ − (α/L)s`, taking `D_s + b₀₀Î` to `D_s + (α/L)Î`.
///
/// The input jet's `R` stands for `D_s + b₀₀(s)Î`; its `alpha` is ignored and
/// replaced by the quadrature value. Each coefficient of `u^a v^b` picks up
/// `e^{−i(a−b)Φ}` (elliptic) or `e^{−(a−b)Φ}` (hyperbolic).
pub fn linearize(data: &StraighteningData, jet: &SymbolJet) -> Result<SymbolJet> {
    if data.case != jet.case {
        return Err(Error::InvalidInput(format!("case mismatch: data {:?}, jet {:?}", data.case, jet.case)));
    }
    if (data.length - jet.length).abs() > 1e-14 * data.length {
        return Err(Error::InvalidInput("straightening and jet lengths differ".into()));
    }
    let mut phase = data.phase();
    if phase.grid().len() != jet.grid().len() {
        phase = phase.resample(jet.grid());
    }
    let phase = SFun::from_values(jet.grid().clone(), phase.values().to_vec());
    let case = jet.case;
    let mut out = jet.map_coeffs(|_, _, (a, b), c| {
        let d = a as f64 - b as f64;
        c.zip(&phase, |v, ph| {
            let f = match case {
                Case::Elliptic => Complex64::from_polar(1.0, -d * ph.re),
                Case::Hyperbolic => Complex64::new((-d * ph.re).exp(), 0.0),
            };
            v * f
        })
    });
    out.alpha = data.alpha_quadrature();
    Ok(out)
}

/// Solution of the homological equation at one level.
#[derive(Debug, Clone, PartialEq)]
pub struct HomologicalSolution {
    pub m: u32,
    /// Generator `G = Σ_k G_k R^k` (carrying `N^{2−m}`), keyed by `k`.
    pub generator: BTreeMap<u32, Poly2<SFun>>,
    /// Diagonal means `f`, keyed by `k`; `k = 0` is the `f_j` contribution.
    pub diagonal: BTreeMap<u32, Poly2<Complex64>>,
    /// Largest collocation backward error.
    pub bvp_residual: f64,
    /// `max |𝒟G − (X − f)/(2i)|`.
    pub equation_residual: f64,
}

struct MonoJob {
    k: u32,
    a: u32,
    b: u32,
    sigma: SFun,
    /// partner coefficient `(b, a)` for the hyperbolic pair solve
    partner: Option<SFun>,
}

fn solve_diagonal(x: &SFun) -> (Complex64, SFun) {
    let f = x.mean();
    let g = x.map(|v| (v - f) / Complex64::new(0.0, 2.0)).integral();
    (f, g)
}

/// `g' − iκg = σ`, `g` real at both ends.
fn solve_elliptic(kappa: f64, sigma: &SFun) -> Result<(SFun, f64)> {
    let re = sigma.re();
    let im = sigma.im();
    let rhs = re.zip(&im.derivative(), |r, di| -kappa * r - di);
    let (v, res) = solve_dirichlet(-kappa * kappa, &rhs)?;
    let v = v.re();
    let u = v.derivative().zip(&im, |dv, i| (dv - i) / kappa);
    Ok((u.zip(&v, |uu, vv| Complex64::new(uu.re, vv.re)), res))
}

/// `p' − κp = σ₁` with `p = g_ab` and `h' + κh = σ̄₂` with `h = conj(g_ba)`,
/// subject to `p = h` at both ends.
fn solve_hyperbolic(kappa: f64, s1: &SFun, s2: &SFun) -> Result<(SFun, SFun, f64)> {
    let s2c = s2.conj();
    let se = s1.zip(&s2c, |a, b| 0.5 * (a + b));
    let so = s1.zip(&s2c, |a, b| 0.5 * (a - b));
    let rhs = se.zip(&so.derivative(), |e, d| -kappa * e - d);
    let (o, res) = solve_dirichlet(kappa * kappa, &rhs)?;
    let e = o.derivative().zip(&so, |d, s| (d - s) / kappa);
    let gab = e.zip(&o, |x, y| x + y);
    let gba = e.zip(&o, |x, y| (x - y).conj());
    Ok((gab, gba, res))
}

fn resonance_distance(alpha: f64, a: u32, b: u32) -> f64 {
    let r = alpha * (a as f64 - b as f64) / PI;
    (r - r.round()).abs()
}

/// Solves `𝒟G_k = (X_{m,k} − f_k)/(2i)` for every `R`-power `k` at level `m`.
///
/// Diagonal monomials give `f = (1/L)∫X` and `G(0) = 0`. Off-diagonal ones go
/// through second-order Dirichlet problems with `G` real at `s = 0, L`
/// (elliptic) or `G_ab = conj(G_ba)` there (hyperbolic); both say that the
/// real part of the symbol is even and the imaginary part odd in `η` at the ends.
pub fn homological_step(jet: &SymbolJet, m: u32) -> Result<HomologicalSolution> {
    let case = jet.case;
    let alpha = jet.alpha;
    let kappa_of = |a: u32, b: u32| alpha * (a as f64 - b as f64) / jet.length;
    let two_i = Complex64::new(0.0, 2.0);

    let mut jobs = Vec::new();
    for (&(lev, k), p) in jet.terms() {
        if lev != m {
            continue;
        }
        for (&(a, b), c) in p.terms() {
            match case {
                Case::Elliptic => {
                    if a != b {
                        let distance = resonance_distance(alpha, a, b);
                        if distance < RESONANCE_TOL {
                            return Err(Error::NearResonance { a, b, distance });
                        }
                    }
                    jobs.push(MonoJob { k, a, b, sigma: c.clone(), partner: None });
                }
                Case::Hyperbolic => {
                    if a != b && alpha.abs() < 1e-12 {
                        return Err(Error::DegenerateOrbit);
                    }
                    if a == b {
                        jobs.push(MonoJob { k, a, b, sigma: c.clone(), partner: None });
                    } else if a < b || p.get(b, a).is_none() {
                        let partner = p.get(b, a).cloned().unwrap_or_else(|| SFun::constant(jet.grid(), Complex64::new(0.0, 0.0)));
                        let (a, b, sigma, partner) = if a < b { (a, b, c.clone(), partner) } else { (b, a, partner, c.clone()) };
                        jobs.push(MonoJob { k, a, b, sigma, partner: Some(partner) });
                    }
                }
            }
        }
    }

    type Piece = (u32, Vec<((u32, u32), SFun)>, Option<((u32, u32), Complex64)>, f64);
    let pieces: Vec<Piece> = jobs
        .par_iter()
        .map(|job| -> Result<Piece> {
            let sigma = job.sigma.map(|v| v / two_i);
            if job.a == job.b {
                let (f, g) = solve_diagonal(&job.sigma);
                return Ok((job.k, vec![((job.a, job.b), g)], Some(((job.a, job.b), f)), 0.0));
            }
            let kappa = kappa_of(job.a, job.b);
            match &job.partner {
                None => {
                    let (g, res) = solve_elliptic(kappa, &sigma)?;
                    Ok((job.k, vec![((job.a, job.b), g)], None, res))
                }
                Some(partner) => {
                    let s2 = partner.map(|v| v / two_i);
                    let (gab, gba, res) = solve_hyperbolic(kappa, &sigma, &s2)?;
                    Ok((job.k, vec![((job.a, job.b), gab), ((job.b, job.a), gba)], None, res))
                }
            }
        })
        .collect::<Result<_>>()?;

    let mut generator: BTreeMap<u32, Poly2<SFun>> = BTreeMap::new();
    let mut diagonal: BTreeMap<u32, Poly2<Complex64>> = BTreeMap::new();
    let mut bvp_residual: f64 = 0.0;
    for (k, gs, f, res) in pieces {
        bvp_residual = bvp_residual.max(res);
        let gp = generator.entry(k).or_insert_with(|| Poly2::new(case.basis(), MAX_DEGREE));
        for ((a, b), g) in gs {
            gp.add_term(a, b, g);
        }
        if let Some(((a, b), fv)) = f {
            diagonal.entry(k).or_insert_with(|| Poly2::new(case.basis(), MAX_DEGREE)).add_term(a, b, fv);
        }
    }

    // pointwise check of 𝒟G = (X − f)/(2i)
    let alg = jet.algebra();
    let mut equation_residual: f64 = 0.0;
    for (&(lev, k), p) in jet.terms() {
        if lev != m {
            continue;
        }
        let empty = Poly2::new(case.basis(), MAX_DEGREE);
        let dg = alg.d(generator.get(&k).unwrap_or(&empty));
        for (&(a, b), c) in p.terms() {
            let f = diagonal.get(&k).map_or(Complex64::new(0.0, 0.0), |d| d.coeff(a, b));
            let lhs = dg.get(a, b).cloned().unwrap_or_else(|| SFun::constant(jet.grid(), Complex64::new(0.0, 0.0)));
            let r = lhs.zip(c, |l, x| l - (x - f) / two_i).max_abs();
            equation_residual = equation_residual.max(r);
        }
    }
    generator.retain(|_, p| !p.is_zero());
    Ok(HomologicalSolution { m, generator, diagonal, bvp_residual, equation_residual })
}

impl HomologicalSolution {
    /// `P = ½(G + Ḡ)`, `Q = (G − Ḡ)/(2i)` in `(y, η)` coordinates, per `R`-power.
    pub fn real_parts(&self, case: Case) -> BTreeMap<u32, (Poly2<SFun>, Poly2<SFun>)> {
        self.generator
            .iter()
            .map(|(&k, g)| {
                let gc = symbol_conj(g, case);
                let p = g.add(&gc).scale(Complex64::new(0.5, 0.0)).to_yeta();
                let q = g.sub(&gc).scale(Complex64::new(0.0, -0.5)).to_yeta();
                (k, (p, q))
            })
            .collect()
    }

    /// `max |P^o|, |Q^e|` at `s = 0, L` (odd/even in `η`).
    pub fn boundary_residual(&self, case: Case) -> f64 {
        let mut r: f64 = 0.0;
        for (p, q) in self.real_parts(case).values() {
            for (&(_, e), c) in p.terms() {
                if e % 2 == 1 {
                    r = r.max(c.first().norm()).max(c.last().norm());
                }
            }
            for (&(_, e), c) in q.terms() {
                if e % 2 == 0 {
                    r = r.max(c.first().norm()).max(c.last().norm());
                }
            }
        }
        r
    }

    /// Largest imaginary part among the `(y, η)` coefficients of `P` and `Q`.
    pub fn reality_residual(&self, case: Case) -> f64 {
        self.real_parts(case)
            .values()
            .flat_map(|(p, q)| p.terms().values().chain(q.terms().values()).map(|c| c.max_imag()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    pub fn degree(&self) -> u32 {
        self.generator.values().map(|p| p.degree()).max().unwrap_or(0)
    }

    pub fn has_parity(&self) -> bool {
        self.generator.values().all(|p| p.has_parity(self.m % 2 == 1))
    }

    fn as_terms(&self) -> Terms {
        // G carries N^{2−m}, i.e. level m + 2
        self.generator.iter().map(|(&k, p)| ((self.m + 2, k), p.clone())).collect()
    }
}

/// Ledger entry for one solved level `m`, i.e. the pair `(P, Q)` of index `j/2`
/// with `j = m − 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub m: u32,
    pub degree: u32,
    /// Stored bound `j + 2 = m` on the transverse degree of `P + iQ`.
    pub degree_bound: u32,
    pub parity_ok: bool,
    /// Largest coefficient of the generator.
    pub generator_norm: f64,
    pub bvp_residual: f64,
    pub equation_residual: f64,
    pub boundary_residual: f64,
    pub reality_residual: f64,
    /// Size of the non-normal part left at level `m` after conjugation.
    pub remainder: f64,
}

/// Diagonal normal-form data: `f_j(I)` for `j = 1..K` plus the `R`-power remainders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormPolys {
    pub case: Case,
    pub alpha: f64,
    pub length: f64,
    /// Coefficients of `f_j(I) = Σ_a c_a I^a`, `f[j−1]` for `j = 1..K`.
    pub f: Vec<Vec<f64>>,
    /// Largest imaginary part discarded from each `f_j`.
    pub f_imag: Vec<f64>,
    /// `(m, k, coefficients in I)` of the diagonal parts multiplying `R^k`, `k ≥ 1`.
    pub f_r: Vec<(u32, u32, Vec<f64>)>,
    pub levels: Vec<LevelRecord>,
}

impl NormalFormPolys {
    pub fn max_boundary_residual(&self) -> f64 {
        self.levels.iter().map(|l| l.boundary_residual).fold(0.0, f64::max)
    }

    pub fn max_remainder(&self) -> f64 {
        self.levels.iter().map(|l| l.remainder).fold(0.0, f64::max)
    }
}

/// Diagonal polynomial in `uv = 2I` as coefficients in `I`, with the largest imaginary part.
fn action_poly(p: &Poly2<Complex64>) -> (Vec<f64>, f64) {
    let deg = p.terms().keys().map(|&(a, _)| a as usize).max().map_or(0, |d| d + 1);
    let mut out = vec![0.0; deg];
    let mut imag: f64 = 0.0;
    for (&(a, b), c) in p.terms() {
        debug_assert_eq!(a, b);
        let v = c * 2f64.powi(a as i32);
        out[a as usize] += v.re;
        imag = imag.max(v.im.abs());
    }
    (out, imag)
}

/// Brings the jet to normal form through level `2K + 2`, returning `f_1, …, f_K`.
///
/// Levels are processed in order; at level `m` the generator solving the
/// homological equation conjugates the whole operator by `e^{−ad_G}`, truncated
/// at `N^{4−(2K+2)}`.
pub fn normal_form(jet: &SymbolJet, order: usize) -> Result<NormalFormPolys> {
    if order == 0 {
        return Err(Error::InvalidInput("normal form order must be at least 1".into()));
    }
    let max_level = 2 * order as u32 + 2;
    let alg = Algebra { max_level, ..jet.algebra() };
    let mut x = jet.with_model();
    x.retain(|&(m, _), _| m <= max_level);
    let mut f = vec![Vec::new(); order];
    let mut f_imag = vec![0.0; order];
    let mut f_r = Vec::new();
    let mut levels = Vec::new();
    for m in 3..=max_level {
        let current = jet.replace_terms(x.clone());
        let sol = homological_step(&current, m)?;
        if !sol.generator.is_empty() {
            x = alg.exp_ad(&sol.as_terms(), &x, -1.0);
        }
        let mut remainder: f64 = 0.0;
        for (&(lev, k), p) in &x {
            if lev != m {
                continue;
            }
            let d = sol.diagonal.get(&k);
            for (&(a, b), c) in p.terms() {
                let target = d.map_or(Complex64::new(0.0, 0.0), |d| d.coeff(a, b));
                remainder = remainder.max(c.map(|v| v - target).max_abs());
            }
        }
        for (&k, d) in &sol.diagonal {
            let (coeffs, imag) = action_poly(d);
            if k == 0 {
                if m % 2 == 0 {
                    let j = (m as usize - 2) / 2;
                    f[j - 1] = coeffs;
                    f_imag[j - 1] = imag;
                } else if !d.is_zero() {
                    return Err(Error::InvalidInput(format!("odd level {m} produced a diagonal term")));
                }
            } else {
                f_r.push((m, k, coeffs));
            }
        }
        levels.push(LevelRecord {
            m,
            degree: sol.degree(),
            degree_bound: m,
            parity_ok: sol.has_parity(),
            generator_norm: sol.generator.values().map(|p| p.norm()).fold(0.0, f64::max),
            bvp_residual: sol.bvp_residual,
            equation_residual: sol.equation_residual,
            boundary_residual: sol.boundary_residual(jet.case),
            reality_residual: sol.reality_residual(jet.case),
            remainder,
        });
    }
    Ok(NormalFormPolys { case: jet.case, alpha: jet.alpha, length: jet.length, f, f_imag, f_r, levels })
}

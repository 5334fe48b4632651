//! Truncated power series and polynomial symbols.
//!
//! [`Poly2`] is a bivariate polynomial in a pair of phase coordinates tagged by
//! a [`Basis`]; its coefficients are either plain complex numbers or [`SFun`]
//! profiles. [`Series3`] is the real trivariate series used for generating
//! functions, and [`SeriesMap`] a pair of `Poly2` components.

mod map;
mod moyal;
mod poly2;
mod series3;
mod sfun;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use map::{implicit_eliminate, SeriesMap};
pub use moyal::{moyal_commutator, moyal_product, moyal_product_with, MoyalCommutator};
pub use poly2::Poly2;
pub use series3::Series3;
pub(crate) use series3::sqrt_one_plus;
pub use sfun::{ChebGrid, SFun, DEFAULT_NODES};

/// Coefficient ring for [`Poly2`].
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, c: Complex64) -> Self;
    /// Size used for pruning (max modulus).
    fn magnitude(&self) -> f64;
    fn conj(&self) -> Self;
}

impl Coeff for Complex64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn scale(&self, c: Complex64) -> Self {
        self * c
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
}

/// Coordinate pair a [`Poly2`] is written in.
///
/// * `YEta`: `(y, η)` with `{y, η} = 1`.
/// * `ZZbar`: `z = y + iη`, `z̄ = y − iη`, so `{z, z̄} = −2i` and `I_e = ½ z z̄`.
/// * `WWbar`: `w = y + η`, `w̄ = y − η`, so `{w, w̄} = −2` and `I_h = ½ w w̄ = ½(y² − η²)`.
///
/// With these conventions `{I_e, z^m z̄^n} = i(m−n) z^m z̄^n` and
/// `{I_h, w^m w̄^n} = (m−n) w^m w̄^n`. The hyperbolic action `½(η² − y²)` used
/// elsewhere in the literature differs by a quarter-turn symplectic rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    YEta,
    ZZbar,
    WWbar,
}

impl Basis {
    /// The bracket `{u, v}` of the two basis coordinates.
    pub fn bracket(self) -> Complex64 {
        match self {
            Basis::YEta => Complex64::new(1.0, 0.0),
            Basis::ZZbar => Complex64::new(0.0, -2.0),
            Basis::WWbar => Complex64::new(-2.0, 0.0),
        }
    }

    /// Rows express `(u, v)` through `(y, η)`.
    fn from_yeta(self) -> [[Complex64; 2]; 2] {
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Basis::YEta => [[one, 0.0.into()], [0.0.into(), one]],
            Basis::ZZbar => [[one, i], [one, -i]],
            Basis::WWbar => [[one, one], [one, -one]],
        }
    }

    /// Rows express `(y, η)` through `(u, v)`.
    fn to_yeta(self) -> [[Complex64; 2]; 2] {
        let one = Complex64::new(1.0, 0.0);
        let half = Complex64::new(0.5, 0.0);
        let mi2 = Complex64::new(0.0, -0.5);
        match self {
            Basis::YEta => [[one, 0.0.into()], [0.0.into(), one]],
            Basis::ZZbar => [[half, half], [mi2, -mi2]],
            Basis::WWbar => [[half, half], [half, -half]],
        }
    }

    /// The action polynomial in this basis: `I_e` for `YEta`/`ZZbar`, `I_h` for `WWbar`.
    pub fn action(self, max_degree: u32) -> Poly2 {
        let mut p = Poly2::new(self, max_degree);
        match self {
            Basis::YEta => {
                p.add_term(2, 0, Complex64::new(0.5, 0.0));
                p.add_term(0, 2, Complex64::new(0.5, 0.0));
            }
            Basis::ZZbar | Basis::WWbar => p.add_term(1, 1, Complex64::new(0.5, 0.0)),
        }
        p
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

pub(crate) fn falling(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    ((n - k + 1)..=n).fold(1.0, |acc, v| acc * v as f64)
}

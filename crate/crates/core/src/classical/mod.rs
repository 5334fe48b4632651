//! Classical Birkhoff normal form of the bouncing-ball map.
//!
//! Jet → generating function → twist map jet in the chord coordinates
//! `(x, ξ)` → Birkhoff normal form → coefficients `b₀, …, bₙ`, and the
//! triangular inversion back to the jet.

mod birkhoff;
mod twist;

pub use birkhoff::{birkhoff_normalize, birkhoff_normalize_map, BirkhoffForm};
pub use twist::{generating_function, twist_map, TwistMapJet};

use serde::{Deserialize, Serialize};

use crate::domain::DomainJet;
use crate::error::{Error, Result};

/// Normal-form coefficients `(b₀, …, bₙ)` of the jet, in physical units.
///
/// With `scale = r` the action scales by `r`, so `b_k` is divided by `r^k`.
pub fn forward_map(jet: &DomainJet, n: usize) -> Result<Vec<f64>> {
    Ok(forward_form(jet, n)?.b)
}

/// Like [`forward_map`] but returns the full [`BirkhoffForm`].
pub fn forward_form(jet: &DomainJet, n: usize) -> Result<BirkhoffForm> {
    jet.validate()?;
    let phi = generating_function(jet, n)?;
    let tw = twist_map(&phi, jet)?;
    let (mut form, _) = birkhoff_normalize(&tw)?;
    for (k, b) in form.b.iter_mut().enumerate() {
        *b /= jet.scale.powi(k as i32);
    }
    Ok(form)
}

/// Branch of `b₀ ↦ a₀` to use in [`invert`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `A − 1 = cos b₀`, `a₀ ∈ (−½, 0)`.
    #[default]
    Elliptic,
    /// `A − 1 = cosh b₀`, `a₀ > 0`.
    Hyperbolic,
    /// `A − 1 = −cosh b₀`, `a₀ < −½`.
    HyperbolicReflected,
}

/// Solves `forward_map(a) = b` for the jet `a₀, …, aₙ` (`n = b.len() − 1`).
///
/// `a₀` comes from `b₀` in closed form; each higher `a_k` from the affine
/// relation `b_k = B + C a_k`, with `B`, `C` measured by two forward
/// evaluations at `a_k ∈ {0, 1}`, followed by a few Newton sweeps.
pub fn invert(b: &[f64], branch: Branch, scale: f64) -> Result<DomainJet> {
    if b.is_empty() {
        return Err(Error::InvalidInput("need at least b0".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidInput("scale must be positive".into()));
    }
    let a_minus_1 = match branch {
        Branch::Elliptic => b[0].cos(),
        Branch::Hyperbolic => b[0].cosh(),
        Branch::HyperbolicReflected => -b[0].cosh(),
    };
    let a_param = a_minus_1 + 1.0;
    if a_param.abs() < 1e-12 {
        return Err(Error::Degenerate);
    }
    let mut coeffs = vec![0.5 * (0.5 * a_param - 1.0)];
    let mut slopes = vec![0.0];
    let eval = |c: &[f64], k: usize| -> Result<f64> {
        let jet = DomainJet { coeffs: c.to_vec(), scale };
        Ok(forward_map(&jet, k)?[k])
    };
    for k in 1..b.len() {
        coeffs.push(0.0);
        let base = eval(&coeffs, k)?;
        coeffs[k] = 1.0;
        let slope = eval(&coeffs, k)? - base;
        if slope.abs() < 1e-12 {
            return Err(Error::TriangularBreakdown { order: k, c: slope.abs() });
        }
        coeffs[k] = (b[k] - base) / slope;
        slopes.push(slope);
    }
    // when |B| ≫ |C aₖ| the probe difference loses digits; polish against the
    // full map with the measured slopes
    for _ in 0..3 {
        for k in 1..b.len() {
            let r = b[k] - eval(&coeffs[..=k], k)?;
            coeffs[k] += r / slopes[k];
        }
    }
    Ok(DomainJet { coeffs, scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::binomial;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn b0_is_the_rotation_angle() {
        let b = forward_map(&DomainJet::new(vec![-0.25]), 0).unwrap();
        assert!((b[0] - FRAC_PI_2).abs() < 1e-12);
        let jet = invert(&[FRAC_PI_2], Branch::Elliptic, 1.0).unwrap();
        assert!((jet.a0() + 0.25).abs() < 1e-15);
    }

    #[test]
    fn affine_in_top_coefficient() {
        for n in 1..=2 {
            let mk = |an: f64| {
                let mut c = vec![-0.2, 0.01, -0.003];
                c.truncate(n);
                c.push(an);
                forward_map(&DomainJet::new(c), n).unwrap()[n]
            };
            let (b0, b1, b2) = (mk(0.0), mk(1.0), mk(2.0));
            let resid = (b2 - 2.0 * b1 + b0).abs() / b1.abs().max(1.0);
            assert!(resid < 1e-12, "n = {n}: {resid:e}");
        }
    }

    #[test]
    fn slope_matches_closed_form() {
        // C(a₀) = −4(n+1)·binom(2n+1, n)·(A(2−A))^{−(n+1)/2}
        for &a0 in &[-0.1, -0.2, -0.3, -0.4] {
            for n in 1..=3 {
                let a: f64 = 2.0 * (2.0 * a0 + 1.0);
                let expect = -4.0 * (n + 1) as f64 * binomial(2 * n as u32 + 1, n as u32) * (a * (2.0 - a)).powf(-0.5 * (n + 1) as f64);
                let mk = |an: f64| {
                    let mut c = vec![a0; n + 1];
                    for (i, v) in c.iter_mut().enumerate().skip(1) {
                        *v = 0.003 * i as f64;
                    }
                    c[n] = an;
                    forward_map(&DomainJet::new(c), n).unwrap()[n]
                };
                let slope = mk(1.0) - mk(0.0);
                assert!((slope / expect - 1.0).abs() < 1e-9, "a0={a0} n={n}: {slope} vs {expect}");
            }
        }
    }

    #[test]
    fn inversion_roundtrip() {
        let jet = DomainJet::new(vec![-0.2, 0.01, -0.002]);
        let b = forward_map(&jet, 2).unwrap();
        let back = invert(&b, Branch::Elliptic, 1.0).unwrap();
        for (x, y) in back.coeffs.iter().zip(&jet.coeffs) {
            assert!((x - y).abs() <= 1e-9 * y.abs());
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let n = rng.gen_range(1..=3);
            let mut c = vec![rng.gen_range(-0.45..-0.05)];
            for _ in 0..n {
                c.push(rng.gen_range(-0.05..0.05));
            }
            let jet = DomainJet::new(c).with_scale(rng.gen_range(0.5..2.0));
            let b = forward_map(&jet, n).unwrap();
            let back = invert(&b, Branch::Elliptic, jet.scale).unwrap();
            for (x, y) in back.coeffs.iter().zip(&jet.coeffs) {
                assert!((x - y).abs() <= 1e-9 * y.abs().max(1e-3), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn perturbing_b1_shifts_a1_linearly() {
        let jet = DomainJet::new(vec![-0.2, 0.01]);
        let b = forward_map(&jet, 1).unwrap();
        let c = {
            let p = |a1: f64| forward_map(&DomainJet::new(vec![-0.2, a1]), 1).unwrap()[1];
            p(1.0) - p(0.0)
        };
        let delta = 1e-3;
        let shifted = invert(&[b[0], b[1] + delta], Branch::Elliptic, 1.0).unwrap();
        assert!((shifted.coeffs[1] - (0.01 + delta / c)).abs() < 1e-12);
    }

    #[test]
    fn hyperbolic_forward_and_inverse() {
        let jet = DomainJet::new(vec![0.1, 0.02]);
        let b = forward_map(&jet, 1).unwrap();
        assert!((b[0] - 1.4f64.acosh()).abs() < 1e-12);
        let back = invert(&b, Branch::Hyperbolic, 1.0).unwrap();
        assert!((back.coeffs[0] - 0.1).abs() < 1e-12);
        assert!((back.coeffs[1] - 0.02).abs() < 1e-10);
    }
}

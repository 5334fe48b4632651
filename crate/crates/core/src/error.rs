use thiserror::Error;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis mismatch: {0:?} vs {1:?}")]
    BasisMismatch(crate::series::Basis, crate::series::Basis),
    #[error("degenerate quadratic part (A = 0 excluded, a0 = -1/2)")]
    Degenerate,
    #[error("degenerate orbit: |trace| = 2 within tolerance")]
    DegenerateOrbit,
    #[error("flat vertex: a0 = 0 has no finite curvature radius")]
    FlatVertex,
    #[error("low-order resonance: e^(i k alpha) = 1 for k = {k}")]
    LowOrderResonance { k: u32 },
    #[error("near resonance at monomial ({a},{b}): alpha*(a-b)/pi is within {distance:e} of an integer")]
    NearResonance { a: u32, b: u32, distance: f64 },
    #[error("triangular inversion broke down at order {order}: |C| = {c:e}")]
    TriangularBreakdown { order: usize, c: f64 },
    #[error("no admissible root: {0}")]
    NoAdmissibleRoot(String),
    #[error("ray-boundary intersection failed: {0}")]
    Intersection(String),
    #[error("tangential shot (|p| >= 1)")]
    Tangency,
    #[error("root finder did not converge: {0}")]
    NoConvergence(String),
    #[error("finite differences are noise dominated (Richardson disagreement {0:e})")]
    NoisyDifferences(f64),
    #[error("chaotic or resonant layer detected: {0}")]
    ChaoticLayer(String),
    #[error("self-intersecting or non-positive closure: {0}")]
    SelfIntersection(String),
    #[error("boundary value solver residual {0:e} above tolerance")]
    BvpResidual(f64),
    #[error("basis ill-conditioned: achieved residual {0:e}")]
    IllConditioned(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

//! Lazutkin straightening of the bouncing-ball neighborhood and the
//! semiclassical normal form of the perturbed model operator.

mod bvp;
mod engine;
mod straightening;
mod symbol;

pub use bvp::{solve_dirichlet, BVP_TOL};
pub use engine::{homological_step, linearize, normal_form, HomologicalSolution, LevelRecord, NormalFormPolys, RESONANCE_TOL};
pub use straightening::{quadratic_model, semiclassical_n, solve_straightening, Case, QuadraticModel, StraighteningData};
pub use symbol::{symbol_conj, CoeffSpec, JetSpec, SymbolJet, TermSpec};

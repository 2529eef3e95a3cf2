//! Numerical solution of the Liouville–Master equation for piecewise
//! deterministic processes whose switching intervals have memory.
//!
//! The extended density `φ_s(x, y, t)` (position, time since the last switch,
//! time) is transported along the characteristics `ξ = t − y` by an explicit
//! upwind scheme and closed at `y = 0` by a quadrature of the switching flux.
//! Integrating over `y` gives the marginal distribution of `X(t)`.

pub mod analytic;
pub mod harness;
pub mod model;
pub mod montecarlo;
pub mod quad;
pub mod solver;

pub use model::{builtin_scenario, IntervalDistribution, PdpModel, Scenario, TransitionMatrix, VectorField};
pub use solver::{solve, BoundaryClosure, MarginalResult, Mesh, QuadratureRule, SolveOptions, Solution, SolverError};

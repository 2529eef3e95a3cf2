//! First-order upwind scheme along the characteristics `ξ = t − y`, closed at
//! `y = 0` by an explicit quadrature of the switching integral.
//!
//! The unknown `φ_l(x_k, y_j, ξ_i)` is the distribution function
//! `F_l(x_k, y_j, t_n)` with `i = n − j`. Two traversals are provided:
//!
//! * [`CharacteristicGrid`] walks one characteristic line at a time and keeps
//!   every value. It is the literal form of the scheme and is only practical
//!   for small meshes.
//! * [`solve`] advances the whole front `{(j, i) : i + j = n}` one time step
//!   at a time, keeping `O(S · N_k · N)` values. Each value is computed from
//!   the same operands in the same order as in the literal traversal, so the
//!   two agree bit for bit.

mod front;
mod grid;
mod marginal;
mod mesh;

pub use front::{solve, solve_with_hazards, Diagnostics, OpCount, Solution, SolveOptions};
pub use grid::{CharacteristicGrid, MAX_FULL_HISTORY};
pub use marginal::MarginalResult;

pub use mesh::{cfl_step, CflParams, Mesh, DEFAULT_MAX_STEPS};

use thiserror::Error;

use crate::model::{HazardFn, ModelError, PdpModel, TransitionMatrix};

/// Slack allowed below zero and against monotonicity in `x`.
pub const INVARIANT_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("mesh too fine for horizon: {steps} steps exceed the cap of {max_steps}")]
    MeshTooFine { steps: u64, max_steps: usize },
    #[error("CFL condition violated: dy = {dy} but the bound is {bound}")]
    CflViolated { dy: f64, bound: f64 },
    #[error("instability detected at state {state}, node {k}, memory {j}, characteristic {i}")]
    Instability { state: usize, k: usize, j: usize, i: usize },
    #[error("full-history grid would hold {entries} values (limit {limit})")]
    GridTooLarge { entries: u64, limit: u64 },
}

/// Quadrature weights for the boundary integral (`w`) and for the memory
/// marginal (`v`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureRule {
    /// `w_0 = 0`, `w_j = 1` for `j ≥ 1`; `v` equal to `w` except `v_0^{(0)} = 1`.
    #[default]
    Rectangle,
}

impl QuadratureRule {
    #[inline]
    pub fn boundary_weight(self, _i: usize, j: usize) -> f64 {
        match self {
            QuadratureRule::Rectangle => {
                if j == 0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    #[inline]
    pub fn marginal_weight(self, n: usize, j: usize) -> f64 {
        match self {
            QuadratureRule::Rectangle => {
                if n == 0 || j > 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `max_i w_0^{(i)}`.
    pub fn w0_max(self) -> f64 {
        match self {
            QuadratureRule::Rectangle => 0.0,
        }
    }

    /// Order of the boundary and marginal rules.
    pub fn order(self) -> (u32, u32) {
        (1, 1)
    }
}

/// Node values of the model on a mesh, shared by both traversals.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub mesh: Mesh,
    pub rule: QuadratureRule,
    pub q: TransitionMatrix,
    /// `A_l(x_k) · Δy/Δx` per state.
    pub courant: Vec<Vec<f64>>,
    /// `λ_l(y_j)` for `j = 0..=N` per state.
    pub hazard: Vec<Vec<f64>>,
    /// `F_0(x_k)`.
    pub initial: Vec<f64>,
    pub closure: BoundaryClosure,
}

impl Discretization {
    pub fn new(model: &PdpModel, hazards: &[HazardFn], mesh: Mesh, rule: QuadratureRule) -> Result<Self, SolverError> {
        if hazards.len() != model.num_states() {
            return Err(SolverError::Model(ModelError::DimensionMismatch(format!(
                "{} hazards for {} states",
                hazards.len(),
                model.num_states()
            ))));
        }
        let courant = model
            .states
            .iter()
            .map(|s| (0..=mesh.nk).map(|k| s.field.eval(mesh.x(k)) * mesh.alpha).collect())
            .collect();
        let hazard = hazards.iter().map(|h| (0..=mesh.n).map(|j| h.eval(mesh.y(j))).collect()).collect();
        let initial = (0..=mesh.nk).map(|k| model.initial_cdf.eval(mesh.x(k))).collect();
        Ok(Discretization { mesh, rule, q: model.q.clone(), courant, hazard, initial, closure: BoundaryClosure::default() })
    }

    pub fn with_closure(mut self, closure: BoundaryClosure) -> Self {
        self.closure = closure;
        self
    }

    pub fn num_states(&self) -> usize {
        self.courant.len()
    }

    /// Initial row `F_{k0}^0 = F_0(x_k) / (S Δy)`.
    pub fn initial_row(&self) -> Vec<f64> {
        let scale = self.num_states() as f64 * self.mesh.dy;
        self.initial.iter().map(|g| g / scale).collect()
    }

    /// `Δy q_{sl} w_j^{(i)} λ_l(y_j)`: weight of `φ_l(x_k, y_j, ξ_{i−j})` in
    /// the boundary value of state `s` on characteristic `i`.
    #[inline]
    pub fn boundary_coefficient(&self, s: usize, l: usize, i: usize, j: usize) -> f64 {
        self.mesh.dy * self.q.get(s, l) * self.rule.boundary_weight(i, j) * self.hazard[l][j]
    }

    #[inline]
    pub fn marginal_coefficient(&self, n: usize, j: usize) -> f64 {
        self.mesh.dy * self.rule.marginal_weight(n, j)
    }
}

/// How the zero-gradient condition `∂ₓF = 0` at `∂Ω` enters the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryClosure {
    /// Ghost nodes `φ_{−1} = φ_0`, `φ_{N_k+1} = φ_{N_k}`; every node, the end
    /// nodes included, takes the upwind update. An end where the flow points
    /// inward keeps its value, so no probability enters or leaves `Ω`.
    #[default]
    Ghost,
    /// Interior update, then `φ_0 ← φ_1` and `φ_{N_k} ← φ_{N_k−1}`. At an
    /// inflow end this freezes the first cell: its upwind difference is
    /// always zero, so mass switched into it never moves on.
    Copy,
}

/// One upwind step along a characteristic:
/// `next_k = prev_k − c_k (prev_{k+ν} − prev_{k+ν−1}) − decay · prev_k`
/// with `c_k = A_k Δy/Δx`, `ν = 1` where `A_k < 0` and `ν = 0` otherwise.
#[inline]
pub fn upwind_row(prev: &[f64], next: &mut [f64], courant: &[f64], decay: f64, closure: BoundaryClosure) {
    let nk = prev.len() - 1;
    debug_assert!(next.len() == prev.len() && courant.len() == prev.len());
    for k in 1..nk {
        let c = courant[k];
        let diff = if c < 0.0 { prev[k + 1] - prev[k] } else { prev[k] - prev[k - 1] };
        next[k] = prev[k] - c * diff - decay * prev[k];
    }
    match closure {
        BoundaryClosure::Ghost => {
            let c = courant[0];
            let diff = if c < 0.0 { prev[1] - prev[0] } else { 0.0 };
            next[0] = prev[0] - c * diff - decay * prev[0];
            let c = courant[nk];
            let diff = if c < 0.0 { 0.0 } else { prev[nk] - prev[nk - 1] };
            next[nk] = prev[nk] - c * diff - decay * prev[nk];
        }
        BoundaryClosure::Copy => {
            next[0] = next[1];
            next[nk] = next[nk - 1];
        }
    }
}

/// Counts of negative values and of decreases in `x` over checked rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantCheck {
    pub rows_checked: u64,
    pub min_value: f64,
    pub negative_count: u64,
    pub monotonicity_violations: u64,
}

impl Default for InvariantCheck {
    fn default() -> Self {
        InvariantCheck { rows_checked: 0, min_value: f64::INFINITY, negative_count: 0, monotonicity_violations: 0 }
    }
}

impl InvariantCheck {
    #[inline]
    pub fn check_row(&mut self, row: &[f64]) {
        self.rows_checked += 1;
        let mut prev = f64::NEG_INFINITY;
        for &v in row {
            self.min_value = self.min_value.min(v);
            if v < -INVARIANT_SLACK {
                self.negative_count += 1;
            }
            if v < prev - INVARIANT_SLACK * prev.abs().max(1.0) {
                self.monotonicity_violations += 1;
            }
            prev = v;
        }
    }

    pub fn violations(&self) -> u64 {
        self.negative_count + self.monotonicity_violations
    }

    pub fn merge(&mut self, other: &InvariantCheck) {
        self.rows_checked += other.rows_checked;
        self.min_value = self.min_value.min(other.min_value);
        self.negative_count += other.negative_count;
        self.monotonicity_violations += other.monotonicity_violations;
    }
}

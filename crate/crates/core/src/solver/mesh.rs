use crate::model::{HazardFn, PdpModel};

use super::{QuadratureRule, SolverError};

/// Largest number of time steps [`Mesh::build`] accepts by default.
pub const DEFAULT_MAX_STEPS: usize = 200_000;

/// Constants entering the stability condition `Δy < (M/Δx + L_u)^{-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflParams {
    /// `M = max_l sup_Ω |A_l|`.
    pub big_m: f64,
    /// `L_u = max_l sup λ_l`.
    pub l_u: f64,
    /// `L_d = min_l inf λ_l`.
    pub l_d: f64,
    pub lambda0_max: f64,
    pub w0_max: f64,
}

impl CflParams {
    pub fn new(model: &PdpModel, hazards: &[HazardFn], rule: QuadratureRule) -> Self {
        let big_m = model.field_bound();
        let l_u = hazards.iter().map(|h| h.lambda_sup).fold(0.0, f64::max);
        let l_d = hazards.iter().map(|h| h.lambda_inf).fold(f64::INFINITY, f64::min).max(0.0);
        let lambda0_max = hazards.iter().map(|h| h.lambda_at_zero).fold(0.0, f64::max);
        CflParams { big_m, l_u, l_d, lambda0_max, w0_max: rule.w0_max() }
    }

    /// `(M/Δx + L_u)^{-1}`; infinite when nothing moves or switches.
    pub fn step_bound(&self, dx: f64) -> f64 {
        1.0 / (self.big_m / dx + self.l_u)
    }

    /// Strict CFL inequality plus the side condition `Δy^{-1} > w̄₀ λ₀`.
    pub fn admits(&self, dx: f64, dy: f64) -> bool {
        dy < self.step_bound(dx) && 1.0 / dy > self.w0_max * self.lambda0_max
    }
}

/// `safety · (M/Δx + L_u)^{-1}`, the step before rounding to the horizon.
pub fn cfl_step(big_m: f64, l_u: f64, dx: f64, safety: f64) -> f64 {
    safety / (big_m / dx + l_u)
}

/// Uniform mesh on `Ω × [0, T] × [0, T]` with `Δy = Δt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub omega_a: f64,
    pub dx: f64,
    pub dy: f64,
    /// Number of spatial intervals; nodes are `0..=nk`.
    pub nk: usize,
    /// Number of time steps; `n · dy = T`.
    pub n: usize,
    pub alpha: f64,
}

impl Mesh {
    /// Mesh for `model` with spatial step close to `dx` and the largest time
    /// step `Δy ≤ safety · (M/Δx + L_u)^{-1}` that divides the horizon.
    pub fn build(model: &PdpModel, dx: f64, safety: f64) -> Result<Mesh, SolverError> {
        Mesh::build_with_cap(model, dx, safety, DEFAULT_MAX_STEPS)
    }

    pub fn build_with_cap(model: &PdpModel, dx: f64, safety: f64, max_steps: usize) -> Result<Mesh, SolverError> {
        if !(safety > 0.0 && safety < 1.0) {
            return Err(SolverError::InvalidMesh(format!("safety must lie in (0, 1), got {safety}")));
        }
        let hazards = model.hazards()?;
        let cfl = CflParams::new(model, &hazards, QuadratureRule::Rectangle);
        Mesh::build_with_params(model, &cfl, dx, safety, max_steps)
    }

    /// As [`Mesh::build_with_cap`] with precomputed constants. Any positive
    /// `safety` is accepted here so that unstable meshes can be produced on
    /// purpose.
    pub fn build_with_params(
        model: &PdpModel,
        cfl: &CflParams,
        dx: f64,
        safety: f64,
        max_steps: usize,
    ) -> Result<Mesh, SolverError> {
        let domain = model.domain;
        if !(dx.is_finite() && dx > 0.0) {
            return Err(SolverError::InvalidMesh(format!("dx must be positive, got {dx}")));
        }
        let nk = (domain.length() / dx).round() as usize;
        if nk < 2 {
            return Err(SolverError::InvalidMesh(format!("dx = {dx} leaves fewer than two intervals")));
        }
        let dx = domain.length() / nk as f64;
        // Also cover the field at the actual nodes, in case a sampled bound missed one.
        let node_max = model
            .states
            .iter()
            .flat_map(|s| (0..=nk).map(move |k| s.field.eval(domain.omega_a + k as f64 * dx).abs()))
            .fold(0.0, f64::max);
        let big_m = cfl.big_m.max(node_max);
        let raw = cfl_step(big_m, cfl.l_u, dx, safety);
        let steps = if raw.is_finite() { (domain.t_end / raw).ceil().max(1.0) } else { 1.0 };
        if steps > max_steps as f64 {
            return Err(SolverError::MeshTooFine { steps: steps as u64, max_steps });
        }
        let n = steps as usize;
        let dy = domain.t_end / n as f64;
        let mesh = Mesh { omega_a: domain.omega_a, dx, dy, nk, n, alpha: dy / dx };
        if 1.0 / dy <= cfl.w0_max * cfl.lambda0_max {
            return Err(SolverError::InvalidMesh("boundary quadrature would be implicit-unstable".into()));
        }
        Ok(mesh)
    }

    /// Mesh with explicit step counts; no stability check.
    pub fn from_parts(omega_a: f64, omega_b: f64, nk: usize, dy: f64, n: usize) -> Result<Mesh, SolverError> {
        if !(omega_a < omega_b) || nk < 2 || !(dy > 0.0) {
            return Err(SolverError::InvalidMesh(format!(
                "need omega_a < omega_b, nk >= 2, dy > 0 (got [{omega_a}, {omega_b}], {nk}, {dy})"
            )));
        }
        let dx = (omega_b - omega_a) / nk as f64;
        Ok(Mesh { omega_a, dx, dy, nk, n, alpha: dy / dx })
    }

    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        self.omega_a + k as f64 * self.dx
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy
    }

    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.dy
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.nk).map(|k| self.x(k)).collect()
    }

    pub fn horizon(&self) -> f64 {
        self.t(self.n)
    }

    /// Time index closest to `t`.
    pub fn nearest_step(&self, t: f64) -> usize {
        ((t / self.dy).round().max(0.0) as usize).min(self.n)
    }
}

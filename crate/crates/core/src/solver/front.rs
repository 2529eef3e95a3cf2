use std::time::Instant;

use crate::model::{HazardFn, PdpModel};

use super::{upwind_row, BoundaryClosure, CflParams, Discretization, InvariantCheck, MarginalResult, Mesh, QuadratureRule, SolverError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Refuse meshes that violate the CFL condition.
    pub enforce_cfl: bool,
    /// Check positivity and monotonicity of every computed row.
    pub check_invariants: bool,
    pub closure: BoundaryClosure,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { enforce_cfl: true, check_invariants: true, closure: BoundaryClosure::Ghost }
    }
}

/// Operation counts in the units of the cost estimate `N_k S² N²`: two per
/// interior node of an upwind step, one per term of a boundary sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCount {
    pub upwind: u64,
    pub quadrature: u64,
}

impl OpCount {
    pub fn total(&self) -> u64 {
        self.upwind + self.quadrature
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub cfl: CflParams,
    pub ops: OpCount,
    pub invariants: InvariantCheck,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub marginals: MarginalResult,
    pub diagnostics: Diagnostics,
}

/// Solves `model` on `mesh` and returns the marginals on every time level.
pub fn solve(model: &PdpModel, mesh: Mesh, rule: QuadratureRule, options: SolveOptions) -> Result<Solution, SolverError> {
    let hazards = model.hazards()?;
    solve_with_hazards(model, &hazards, mesh, rule, options)
}

/// As [`solve`] with explicitly supplied hazard functions.
pub fn solve_with_hazards(
    model: &PdpModel,
    hazards: &[HazardFn],
    mesh: Mesh,
    rule: QuadratureRule,
    options: SolveOptions,
) -> Result<Solution, SolverError> {
    let start = Instant::now();
    let mut cfl = CflParams::new(model, hazards, rule);
    let disc = Discretization::new(model, hazards, mesh, rule)?.with_closure(options.closure);
    // Use the node values actually seen by the scheme as well.
    let node_max = disc.courant.iter().flatten().map(|c| c.abs() / mesh.alpha).fold(0.0, f64::max);
    cfl.big_m = cfl.big_m.max(node_max);
    if options.enforce_cfl && !cfl.admits(mesh.dx, mesh.dy) {
        return Err(SolverError::CflViolated { dy: mesh.dy, bound: cfl.step_bound(mesh.dx) });
    }
    let (marginals, ops, invariants) = sweep(&disc, options.check_invariants)?;
    Ok(Solution {
        marginals,
        diagnostics: Diagnostics { cfl, ops, invariants, runtime_secs: start.elapsed().as_secs_f64() },
    })
}

/// Advances the front `i + j = n` through `n = 0..N`.
///
/// At step `n → n+1` every memory level `j` of every state is advanced to
/// `j + 1` (in place, from the top level down), and each new row is
/// immediately folded into the boundary sums and the marginals of the new
/// level. The new boundary rows are written last.
fn sweep(disc: &Discretization, check: bool) -> Result<(MarginalResult, OpCount, InvariantCheck), SolverError> {
    let mesh = disc.mesh;
    let states = disc.num_states();
    let nk1 = mesh.nk + 1;
    let levels = mesh.n + 1;
    let row_start = |l: usize, j: usize| (l * levels + j) * nk1;

    let mut front = vec![0.0; states * levels * nk1];
    let init = disc.initial_row();
    for l in 0..states {
        front[row_start(l, 0)..row_start(l, 0) + nk1].copy_from_slice(&init);
    }

    let mut marginals = MarginalResult::new(mesh, states);
    let mut invariants = InvariantCheck::default();
    let mut ops = OpCount::default();
    let mut boundary = vec![0.0; states * nk1];
    let mut cdf = vec![0.0; states * nk1];

    let c00 = disc.marginal_coefficient(0, 0);
    for l in 0..states {
        let row = &front[row_start(l, 0)..row_start(l, 0) + nk1];
        for (c, p) in cdf[l * nk1..(l + 1) * nk1].iter_mut().zip(row) {
            *c = c00 * p;
        }
        if check {
            invariants.check_row(row);
        }
    }
    marginals.push_level(&cdf);

    let mut coeffs = vec![0.0; states];
    for n in 0..mesh.n {
        let i_new = n + 1;
        boundary.iter_mut().for_each(|v| *v = 0.0);
        cdf.iter_mut().for_each(|v| *v = 0.0);
        for l in 0..states {
            let courant = &disc.courant[l];
            let state_cdf = &mut cdf[l * nk1..(l + 1) * nk1];
            for j in (0..=n).rev() {
                let decay = disc.hazard[l][j] * mesh.dy;
                let (head, tail) = front.split_at_mut(row_start(l, j + 1));
                let prev = &head[row_start(l, j)..];
                let next = &mut tail[..nk1];
                upwind_row(&prev[..nk1], next, courant, decay, disc.closure);

                let jj = j + 1;
                for (s, c) in coeffs.iter_mut().enumerate() {
                    *c = disc.boundary_coefficient(s, l, i_new, jj);
                }
                for (s, &c) in coeffs.iter().enumerate() {
                    for (b, p) in boundary[s * nk1..(s + 1) * nk1].iter_mut().zip(next.iter()) {
                        *b += c * p;
                    }
                }
                let v = disc.marginal_coefficient(i_new, jj);
                for (a, p) in state_cdf.iter_mut().zip(next.iter()) {
                    *a += v * p;
                }
                if check {
                    invariants.check_row(next);
                }
            }
        }
        for s in 0..states {
            let new_row = &boundary[s * nk1..(s + 1) * nk1];
            front[row_start(s, 0)..row_start(s, 0) + nk1].copy_from_slice(new_row);
            let v = disc.marginal_coefficient(i_new, 0);
            for (a, p) in cdf[s * nk1..(s + 1) * nk1].iter_mut().zip(new_row) {
                *a += v * p;
            }
            if check {
                invariants.check_row(new_row);
            }
        }

        let rows = (states * (n + 1)) as u64;
        ops.upwind += rows * 2 * (mesh.nk as u64 - 1);
        ops.quadrature += rows * states as u64 * nk1 as u64;

        if !(boundary.iter().all(|v| v.is_finite()) && cdf.iter().all(|v| v.is_finite())) {
            return Err(locate_instability(&front, states, levels, nk1, i_new));
        }
        marginals.push_level(&cdf);
    }
    Ok((marginals, ops, invariants))
}

fn locate_instability(front: &[f64], states: usize, levels: usize, nk1: usize, n: usize) -> SolverError {
    for l in 0..states {
        for j in 0..=n.min(levels - 1) {
            let start = (l * levels + j) * nk1;
            if let Some(k) = front[start..start + nk1].iter().position(|v| !v.is_finite()) {
                return SolverError::Instability { state: l, k, j, i: n - j };
            }
        }
    }
    SolverError::Instability { state: 0, k: 0, j: 0, i: n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_scenario, Domain, IntervalDistribution, Scenario, TransitionMatrix, VectorField};
    use crate::solver::CharacteristicGrid;

    #[test]
    fn front_matches_characteristic_traversal() {
        let m = builtin_scenario(Scenario::GammaFilter).with_horizon(1.5).unwrap();
        let mesh = Mesh::build(&m, 0.1, 0.9).unwrap();
        let grid = CharacteristicGrid::solve(&m, mesh, QuadratureRule::Rectangle).unwrap();
        let literal = grid.marginalize();
        let sol = solve(&m, mesh, QuadratureRule::Rectangle, SolveOptions::default()).unwrap();
        assert_eq!(literal, sol.marginals);
        assert_eq!(grid.check_invariants().violations(), 0);
        assert_eq!(sol.diagnostics.invariants.violations(), 0);
    }

    #[test]
    fn cfl_is_enforced() {
        let m = builtin_scenario(Scenario::McFaddenFilter);
        let mesh = Mesh::from_parts(-1.0, 1.0, 20, 0.06, 10).unwrap();
        let err = solve(&m, mesh, QuadratureRule::Rectangle, SolveOptions::default()).unwrap_err();
        assert!(matches!(err, SolverError::CflViolated { .. }), "{err}");
    }

    #[test]
    fn blow_up_is_reported() {
        let domain = Domain::new(-1.0, 1.0, 1.0).unwrap();
        let m = PdpModel::from_parts(
            vec![(VectorField::affine(0.0, 1.0), IntervalDistribution::McFadden)],
            TransitionMatrix::identity(1),
            domain,
        )
        .unwrap();
        // Courant number 5: the step front explodes long before 4000 steps.
        let mesh = Mesh::from_parts(-1.0, 1.0, 40, 0.25, 4000).unwrap();
        let opts = SolveOptions { enforce_cfl: false, check_invariants: false, ..Default::default() };
        let err = solve_with_hazards(&m, &[HazardFn::constant(0.0)], mesh, QuadratureRule::Rectangle, opts).unwrap_err();
        assert!(matches!(err, SolverError::Instability { state: 0, .. }), "{err}");
    }

    #[test]
    fn op_count_formula() {
        let m = builtin_scenario(Scenario::McFaddenFilter).with_horizon(1.0).unwrap();
        let mesh = Mesh::from_parts(-1.0, 1.0, 20, 0.01, 100).unwrap();
        let sol = solve(&m, mesh, QuadratureRule::Rectangle, SolveOptions::default()).unwrap();
        // Σ_{n=1}^{N} n = N(N+1)/2 rows per state
        let rows = 2 * 100 * 101 / 2;
        assert_eq!(sol.diagnostics.ops.upwind, rows * 2 * 19);
        assert_eq!(sol.diagnostics.ops.quadrature, rows * 2 * 21);
    }
}

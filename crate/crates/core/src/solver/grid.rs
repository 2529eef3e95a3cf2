use crate::model::PdpModel;

use super::{upwind_row, Discretization, InvariantCheck, MarginalResult, Mesh, QuadratureRule, SolverError};

/// Largest number of stored values in a full-history grid.
pub const MAX_FULL_HISTORY: u64 = 25_000_000;

/// Every `φ_l(x_k, y_j, ξ_i)` with `i + j ≤ N`, filled one characteristic
/// line at a time.
#[derive(Debug, Clone)]
pub struct CharacteristicGrid {
    disc: Discretization,
    // rows of length nk + 1, indexed by row_index(l, i, j)
    phi: Vec<f64>,
    filled: Vec<bool>,
}

impl CharacteristicGrid {
    /// Allocates the grid and fills `(j, i) = (0, 0)` with the initial data.
    pub fn initial_condition(disc: Discretization) -> Result<Self, SolverError> {
        let mesh = disc.mesh;
        let rows = disc.num_states() as u64 * Self::rows_per_state(mesh.n) as u64;
        let entries = rows * (mesh.nk as u64 + 1);
        if entries > MAX_FULL_HISTORY {
            return Err(SolverError::GridTooLarge { entries, limit: MAX_FULL_HISTORY });
        }
        let mut grid = CharacteristicGrid {
            phi: vec![0.0; entries as usize],
            filled: vec![false; rows as usize],
            disc,
        };
        let init = grid.disc.initial_row();
        for l in 0..grid.disc.num_states() {
            grid.row_mut(l, 0, 0).copy_from_slice(&init);
            let r = grid.row_index(l, 0, 0);
            grid.filled[r] = true;
        }
        Ok(grid)
    }

    fn rows_per_state(n: usize) -> usize {
        (n + 1) * (n + 2) / 2
    }

    fn row_index(&self, l: usize, i: usize, j: usize) -> usize {
        let n = self.disc.mesh.n;
        debug_assert!(i + j <= n);
        // characteristic i holds memory levels 0..=n-i
        let offset = i * (n + 1) - i * i.saturating_sub(1) / 2;
        l * Self::rows_per_state(n) + offset + j
    }

    fn row(&self, l: usize, i: usize, j: usize) -> &[f64] {
        let nk1 = self.disc.mesh.nk + 1;
        let r = self.row_index(l, i, j);
        &self.phi[r * nk1..(r + 1) * nk1]
    }

    fn row_mut(&mut self, l: usize, i: usize, j: usize) -> &mut [f64] {
        let nk1 = self.disc.mesh.nk + 1;
        let r = self.row_index(l, i, j);
        &mut self.phi[r * nk1..(r + 1) * nk1]
    }

    pub fn mesh(&self) -> &Mesh {
        &self.disc.mesh
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn is_filled(&self, l: usize, i: usize, j: usize) -> bool {
        self.filled[self.row_index(l, i, j)]
    }

    /// `φ_l(x_k, y_j, ξ_i)`.
    pub fn phi(&self, l: usize, k: usize, j: usize, i: usize) -> f64 {
        self.row(l, i, j)[k]
    }

    /// `F_l(x_k, y_j, t_n) = φ_l(x_k, y_j, ξ_{n−j})`.
    pub fn distribution(&self, l: usize, k: usize, j: usize, n: usize) -> f64 {
        self.phi(l, k, j, n - j)
    }

    /// Advances characteristic `i` of state `l` from memory level `j` to `j + 1`.
    pub fn upwind_step(&mut self, l: usize, i: usize, j: usize) -> Result<(), SolverError> {
        debug_assert!(self.is_filled(l, i, j));
        let nk1 = self.disc.mesh.nk + 1;
        let decay = self.disc.hazard[l][j] * self.disc.mesh.dy;
        let src = self.row_index(l, i, j);
        let dst = self.row_index(l, i, j + 1);
        debug_assert_eq!(dst, src + 1);
        let (head, tail) = self.phi.split_at_mut(dst * nk1);
        let prev = &head[src * nk1..];
        let next = &mut tail[..nk1];
        upwind_row(prev, next, &self.disc.courant[l], decay, self.disc.closure);
        if let Some(k) = next.iter().position(|v| !v.is_finite()) {
            return Err(SolverError::Instability { state: l, k, j: j + 1, i });
        }
        self.filled[dst] = true;
        Ok(())
    }

    /// `φ_s(x_k, 0, ξ_i) = Δy Σ_l q_{sl} Σ_{j=1}^{i} w_j^{(i)} φ_l(x_k, y_j, ξ_{i−j}) λ_l(y_j)`.
    pub fn boundary_close(&self, s: usize, k: usize, i: usize) -> f64 {
        let mut acc = 0.0;
        for l in 0..self.disc.num_states() {
            for j in (1..=i).rev() {
                debug_assert!(self.is_filled(l, i - j, j));
                acc += self.disc.boundary_coefficient(s, l, i, j) * self.phi(l, k, j, i - j);
            }
        }
        acc
    }

    fn close_line(&mut self, i: usize) {
        let nk1 = self.disc.mesh.nk + 1;
        for s in 0..self.disc.num_states() {
            let values: Vec<f64> = (0..nk1).map(|k| self.boundary_close(s, k, i)).collect();
            self.row_mut(s, i, 0).copy_from_slice(&values);
            let r = self.row_index(s, i, 0);
            self.filled[r] = true;
        }
    }

    /// Fills the grid: for each characteristic line, close the boundary at
    /// `j = 0` (the initial data on line 0) and march up to `j = N − i`.
    pub fn solve(model: &PdpModel, mesh: Mesh, rule: QuadratureRule) -> Result<Self, SolverError> {
        let hazards = model.hazards()?;
        let disc = Discretization::new(model, &hazards, mesh, rule)?;
        Self::solve_discretized(disc)
    }

    pub fn solve_discretized(disc: Discretization) -> Result<Self, SolverError> {
        let n = disc.mesh.n;
        let mut grid = CharacteristicGrid::initial_condition(disc)?;
        for i in 0..=n {
            if i > 0 {
                grid.close_line(i);
            }
            for l in 0..grid.disc.num_states() {
                for j in 0..n - i {
                    grid.upwind_step(l, i, j)?;
                }
            }
        }
        Ok(grid)
    }

    /// `ℱ_s(x_k, t_n) = Δy Σ_j v_j^{(n)} F_s(x_k, y_j, t_n)` on every level.
    pub fn marginalize(&self) -> MarginalResult {
        let mesh = self.disc.mesh;
        let states = self.disc.num_states();
        let nk1 = mesh.nk + 1;
        let mut out = MarginalResult::new(mesh, states);
        let mut rows = vec![0.0; states * nk1];
        for n in 0..=mesh.n {
            rows.iter_mut().for_each(|v| *v = 0.0);
            for s in 0..states {
                let acc = &mut rows[s * nk1..(s + 1) * nk1];
                for j in (0..=n).rev() {
                    let c = self.disc.marginal_coefficient(n, j);
                    for (a, p) in acc.iter_mut().zip(self.row(s, n - j, j)) {
                        *a += c * p;
                    }
                }
            }
            out.push_level(&rows);
        }
        out
    }

    /// Positivity and monotonicity over every stored row.
    pub fn check_invariants(&self) -> InvariantCheck {
        let nk1 = self.disc.mesh.nk + 1;
        let mut check = InvariantCheck::default();
        for row in self.phi.chunks(nk1) {
            check.check_row(row);
        }
        check
    }

    /// `‖E_j^i‖ = Σ_l max_k |φ_l(x_k, y_j, ξ_i) − φ_{l,kj}^i|` against an
    /// exact solution `exact(l, x, y, ξ)`.
    pub fn error_norm<F: Fn(usize, f64, f64, f64) -> f64>(&self, exact: F, j: usize, i: usize) -> f64 {
        let mesh = self.disc.mesh;
        (0..self.disc.num_states())
            .map(|l| {
                self.row(l, i, j)
                    .iter()
                    .enumerate()
                    .map(|(k, v)| (exact(l, mesh.x(k), mesh.y(j), mesh.t(i)) - v).abs())
                    .fold(0.0, f64::max)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Domain, HazardFn, IntervalDistribution, TransitionMatrix, VectorField};

    fn two_state_model() -> PdpModel {
        let domain = Domain::new(-1.0, 1.0, 0.5).unwrap();
        PdpModel::from_parts(
            vec![
                (VectorField::affine(1.0, 1.0), IntervalDistribution::Exponential { rate: 2.0 }),
                (VectorField::affine(1.0, -1.0), IntervalDistribution::Gamma { rate: 1.5 }),
            ],
            TransitionMatrix::swap(),
            domain,
        )
        .unwrap()
    }

    #[test]
    fn zero_steps_is_initial_condition() {
        let m = two_state_model();
        let mesh = Mesh::from_parts(-1.0, 1.0, 10, 0.05, 0).unwrap();
        let grid = CharacteristicGrid::solve(&m, mesh, QuadratureRule::Rectangle).unwrap();
        // S = 2, Δy = 0.05: 1/(S Δy) = 10 right of zero, half of it at zero.
        assert_eq!(grid.phi(0, 5, 0, 0), 5.0);
        assert_eq!(grid.phi(1, 7, 0, 0), 10.0);
        assert_eq!(grid.phi(1, 2, 0, 0), 0.0);
        let marg = grid.marginalize();
        assert_eq!(marg.total_cdf(0)[5], 0.5);
        assert_eq!(marg.total_cdf(0)[9], 1.0);
    }

    #[test]
    fn boundary_first_line() {
        let m = two_state_model();
        let mesh = Mesh::from_parts(-1.0, 1.0, 10, 0.05, 4).unwrap();
        let grid = CharacteristicGrid::solve(&m, mesh, QuadratureRule::Rectangle).unwrap();
        let lam = &grid.discretization().hazard;
        for k in 0..=10 {
            // Swap matrix: state 0 is fed only by state 1 and vice versa.
            let expect0 = 0.05 * grid.phi(1, k, 1, 0) * lam[1][1];
            let expect1 = 0.05 * grid.phi(0, k, 1, 0) * lam[0][1];
            assert!((grid.phi(0, k, 0, 1) - expect0).abs() <= 1e-15 * expect0.abs().max(1.0));
            assert!((grid.phi(1, k, 0, 1) - expect1).abs() <= 1e-15 * expect1.abs().max(1.0));
        }
    }

    #[test]
    fn boundary_depends_on_other_state_only() {
        let m = two_state_model();
        let mesh = Mesh::from_parts(-1.0, 1.0, 10, 0.05, 6).unwrap();
        let mut grid = CharacteristicGrid::solve(&m, mesh, QuadratureRule::Rectangle).unwrap();
        let before = grid.boundary_close(0, 7, 5);
        assert!(before > 0.0);
        // Zero the history of state 0: the state-0 boundary is unchanged,
        // the state-1 boundary vanishes.
        for i in 0..5 {
            for j in 1..=5 - i {
                grid.row_mut(0, i, j).iter_mut().for_each(|v| *v = 0.0);
            }
        }
        assert_eq!(grid.boundary_close(0, 7, 5), before);
        assert_eq!(grid.boundary_close(1, 7, 5), 0.0);
    }

    #[test]
    fn zero_hazard_gives_zero_boundary() {
        let domain = Domain::new(-1.0, 1.0, 0.5).unwrap();
        let m = PdpModel::from_parts(
            vec![(VectorField::affine(0.0, 0.5), IntervalDistribution::McFadden)],
            TransitionMatrix::identity(1),
            domain,
        )
        .unwrap();
        // The smeared step front moves one node per step and stays clear of
        // the right end.
        let mesh = Mesh::from_parts(-1.0, 1.0, 40, 0.05, 10).unwrap();
        let disc = Discretization::new(&m, &[HazardFn::constant(0.0)], mesh, QuadratureRule::Rectangle).unwrap();
        let grid = CharacteristicGrid::solve_discretized(disc).unwrap();
        for i in 1..=10 {
            for k in 0..=40 {
                assert_eq!(grid.phi(0, k, 0, i), 0.0);
            }
        }
        // Line 0 is plain transport: total mass stays at one.
        let marg = grid.marginalize();
        for n in 0..=10 {
            assert!((marg.mass_right[n] - 1.0).abs() < 1e-13, "{n}: {}", marg.mass_right[n]);
        }
        assert_eq!(grid.check_invariants().violations(), 0);
    }

    #[test]
    fn oversize_grid_is_refused() {
        let m = two_state_model();
        let mesh = Mesh::from_parts(-1.0, 1.0, 1000, 1e-4, 5000).unwrap();
        let hazards = m.hazards().unwrap();
        let disc = Discretization::new(&m, &hazards, mesh, QuadratureRule::Rectangle).unwrap();
        assert!(matches!(CharacteristicGrid::initial_condition(disc), Err(SolverError::GridTooLarge { .. })));
    }
}

use super::Mesh;

/// Memory-integrated distribution functions on every time level.
///
/// `state_cdf(s, k, n)` is `ℱ_s(x_k, t_n)`, `total_cdf` sums the states and
/// `density` is its right difference quotient.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalResult {
    pub mesh: Mesh,
    pub num_states: usize,
    // [n][s][k]
    cdf: Vec<f64>,
    // [n][k]
    total: Vec<f64>,
    density: Vec<f64>,
    pub mass_right: Vec<f64>,
    pub mass_left: Vec<f64>,
}

impl MarginalResult {
    pub(crate) fn new(mesh: Mesh, num_states: usize) -> Self {
        let levels = mesh.n + 1;
        let nk1 = mesh.nk + 1;
        MarginalResult {
            mesh,
            num_states,
            cdf: Vec::with_capacity(levels * num_states * nk1),
            total: Vec::with_capacity(levels * nk1),
            density: Vec::with_capacity(levels * nk1),
            mass_right: Vec::with_capacity(levels),
            mass_left: Vec::with_capacity(levels),
        }
    }

    /// Appends the next time level; `state_rows` is `[s][k]` flattened.
    pub(crate) fn push_level(&mut self, state_rows: &[f64]) {
        let nk1 = self.mesh.nk + 1;
        debug_assert_eq!(state_rows.len(), self.num_states * nk1);
        self.cdf.extend_from_slice(state_rows);
        let start = self.total.len();
        self.total.extend((0..nk1).map(|k| (0..self.num_states).map(|s| state_rows[s * nk1 + k]).sum::<f64>()));
        let total = &self.total[start..];
        let dx = self.mesh.dx;
        for k in 0..self.mesh.nk {
            self.density.push((total[k + 1] - total[k]) / dx);
        }
        let last = self.density[self.density.len() - 1];
        self.density.push(last);
        self.mass_right.push(total[self.mesh.nk]);
        self.mass_left.push(total[0]);
    }

    pub fn num_levels(&self) -> usize {
        self.mass_right.len()
    }

    pub fn last_level(&self) -> usize {
        self.num_levels() - 1
    }

    pub fn nodes(&self) -> Vec<f64> {
        self.mesh.nodes()
    }

    pub fn time(&self, n: usize) -> f64 {
        self.mesh.t(n)
    }

    pub fn state_cdf(&self, s: usize, k: usize, n: usize) -> f64 {
        let nk1 = self.mesh.nk + 1;
        self.cdf[(n * self.num_states + s) * nk1 + k]
    }

    pub fn state_cdf_row(&self, s: usize, n: usize) -> &[f64] {
        let nk1 = self.mesh.nk + 1;
        let start = (n * self.num_states + s) * nk1;
        &self.cdf[start..start + nk1]
    }

    pub fn total_cdf(&self, n: usize) -> &[f64] {
        let nk1 = self.mesh.nk + 1;
        &self.total[n * nk1..(n + 1) * nk1]
    }

    pub fn density(&self, n: usize) -> &[f64] {
        let nk1 = self.mesh.nk + 1;
        &self.density[n * nk1..(n + 1) * nk1]
    }

    /// Largest `|ℱ(Ω_b, t_n) − 1|` over all levels.
    pub fn max_drift_right(&self) -> f64 {
        self.mass_right.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max)
    }

    /// Largest `|ℱ(Ω_a, t_n)|` over all levels.
    pub fn max_drift_left(&self) -> f64 {
        self.mass_left.iter().map(|m| m.abs()).fold(0.0, f64::max)
    }

    /// Decreases in `x` of the total distribution function, any level.
    pub fn monotonicity_violations(&self, slack: f64) -> usize {
        (0..self.num_levels())
            .map(|n| self.total_cdf(n).windows(2).filter(|w| w[1] < w[0] - slack * w[0].abs().max(1.0)).count())
            .sum()
    }
}

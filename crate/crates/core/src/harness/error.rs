use crate::montecarlo::{self, EmpiricalCdf, McConfig, McError};
use crate::model::PdpModel;
use crate::solver::MarginalResult;

/// Pointwise error `Ê_k = ℱ(x_k, t_n) − ℱ_k^n` against a reference CDF.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub per_node: Vec<f64>,
    pub sup_norm: f64,
    /// Sup norm over the nodes inside the restriction interval.
    pub restricted_sup: f64,
    pub dx: f64,
    pub dy: f64,
}

/// Compares the total CDF on level `n` with `oracle`. Without a restriction
/// the restricted norm equals the full one.
pub fn error_vs_oracle<F: Fn(f64) -> f64>(
    marg: &MarginalResult,
    oracle: F,
    n: usize,
    restrict: Option<(f64, f64)>,
) -> ErrorReport {
    let nodes = marg.nodes();
    let total = marg.total_cdf(n);
    let per_node: Vec<f64> = nodes.iter().zip(total).map(|(&x, &f)| oracle(x) - f).collect();
    let sup_norm = per_node.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let restricted_sup = match restrict {
        None => sup_norm,
        Some((lo, hi)) => {
            // nodes are x_a + k Δx; allow for the rounding in that product
            let slack = 1e-9 * marg.mesh.dx;
            nodes
                .iter()
                .zip(&per_node)
                .filter(|(&x, _)| x >= lo - slack && x <= hi + slack)
                .fold(0.0f64, |m, (_, e)| m.max(e.abs()))
        }
    };
    ErrorReport { per_node, sup_norm, restricted_sup, dx: marg.mesh.dx, dy: marg.mesh.dy }
}

/// `sup_k |a_k − b_k|`.
pub fn cdf_sup_distance(a: &[f64], b: &[f64]) -> f64 {
    montecarlo::sup_distance(a, b)
}

/// Result of a Monte Carlo cross-check at the final level of a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct McComparison {
    pub empirical: EmpiricalCdf,
    /// Time of the compared level.
    pub time: f64,
    /// `sup_k |empirical − numerical|`.
    pub distance: f64,
}

/// Simulates paths up to the time of the last level of `marg` and measures
/// the sup distance between the empirical and the numerical CDF.
pub fn mc_cross_check(
    model: &PdpModel,
    marg: &MarginalResult,
    n_paths: usize,
    seed: u64,
) -> Result<McComparison, McError> {
    let n = marg.last_level();
    let time = marg.time(n);
    let empirical = montecarlo::run_paths(model, time, &marg.nodes(), McConfig::new(n_paths, seed))?;
    let distance = cdf_sup_distance(&empirical.values, marg.total_cdf(n));
    Ok(McComparison { empirical, time, distance })
}

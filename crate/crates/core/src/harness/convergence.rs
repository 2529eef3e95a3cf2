use crate::analytic;
use crate::model::{PdpModel, Scenario};
use crate::solver::{self, Mesh, OpCount, QuadratureRule, SolveOptions, SolverError};

use super::error::error_vs_oracle;
use super::HarnessError;

/// One refinement level of a study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub dx: f64,
    pub dy: f64,
    pub sup_norm: f64,
    pub restricted_sup: f64,
    pub runtime_secs: f64,
    pub ops: OpCount,
    /// Largest `|ℱ(Ω_b) − 1|` over all levels.
    pub drift_right: f64,
    /// Largest `|ℱ(Ω_a)|` over all levels.
    pub drift_left: f64,
    pub invariant_violations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    /// Sorted by `dx`, coarsest first.
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln sup_norm` against `ln dx`.
    pub slope: f64,
    pub slope_restricted: f64,
}

impl ConvergenceReport {
    pub fn from_rows(mut rows: Vec<ConvergenceRow>) -> Result<Self, HarnessError> {
        if rows.len() < 3 {
            return Err(HarnessError::Config(format!("a convergence study needs at least 3 step sizes, got {}", rows.len())));
        }
        rows.sort_by(|a, b| b.dx.total_cmp(&a.dx));
        let dx: Vec<f64> = rows.iter().map(|r| r.dx).collect();
        let slope = fit_slope(&dx, &rows.iter().map(|r| r.sup_norm).collect::<Vec<_>>());
        let slope_restricted = fit_slope(&dx, &rows.iter().map(|r| r.restricted_sup).collect::<Vec<_>>());
        Ok(ConvergenceReport { rows, slope, slope_restricted })
    }

    /// True when every row has a smaller sup norm than the one before.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].sup_norm < w[0].sup_norm)
    }

    /// `max(drift) / dx` on the coarsest row.
    pub fn drift_constant(&self) -> f64 {
        let r = &self.rows[0];
        r.drift_right.max(r.drift_left) / r.dx
    }

    /// CSV table `dx,dy,sup_err,restricted_err,slope`; the slope column holds
    /// the local slope from the previous row.
    pub fn table(&self) -> String {
        let mut out = String::from("dx,dy,sup_err,restricted_err,slope\n");
        for (i, r) in self.rows.iter().enumerate() {
            let local = if i == 0 {
                String::new()
            } else {
                let p = &self.rows[i - 1];
                format!("{:.4}", (r.sup_norm / p.sup_norm).ln() / (r.dx / p.dx).ln())
            };
            out.push_str(&format!("{},{:.6e},{:.6e},{:.6e},{}\n", r.dx, r.dy, r.sup_norm, r.restricted_sup, local));
        }
        out
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Closed-form stationary CDF of a built-in scenario, where one exists.
pub fn scenario_oracle(scenario: Scenario) -> Option<fn(f64) -> f64> {
    fn mcfadden(x: f64) -> f64 {
        analytic::mcfadden_cdf(x).expect("node inside [-1, 1]")
    }
    fn gamma(x: f64) -> f64 {
        analytic::gamma_equilibrium_cdf(x).expect("node inside [-1, 1]")
    }
    match scenario {
        Scenario::McFaddenFilter => Some(mcfadden),
        Scenario::GammaFilter => Some(gamma),
        Scenario::PoissonRc4 => None,
    }
}

/// Solves `model` up to its horizon once per step size and compares the last
/// level with `oracle`.
pub fn convergence_study<F: Fn(f64) -> f64>(
    model: &PdpModel,
    dx_list: &[f64],
    safety: f64,
    oracle: F,
    restrict: Option<(f64, f64)>,
) -> Result<ConvergenceReport, HarnessError> {
    if dx_list.len() < 3 {
        return Err(HarnessError::Config(format!("a convergence study needs at least 3 step sizes, got {}", dx_list.len())));
    }
    let mut sorted = dx_list.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut rows = Vec::with_capacity(sorted.len());
    for dx in sorted {
        let run = || -> Result<ConvergenceRow, SolverError> {
            let mesh = Mesh::build(model, dx, safety)?;
            let sol = solver::solve(model, mesh, QuadratureRule::Rectangle, SolveOptions::default())?;
            let m = &sol.marginals;
            let err = error_vs_oracle(m, &oracle, m.last_level(), restrict);
            Ok(ConvergenceRow {
                dx,
                dy: mesh.dy,
                sup_norm: err.sup_norm,
                restricted_sup: err.restricted_sup,
                runtime_secs: sol.diagnostics.runtime_secs,
                ops: sol.diagnostics.ops,
                drift_right: m.max_drift_right(),
                drift_left: m.max_drift_left(),
                invariant_violations: sol.diagnostics.invariants.violations(),
            })
        };
        rows.push(run().map_err(|source| HarnessError::from_solver(source, Some(dx)))?);
    }
    ConvergenceReport::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(dx: f64, err: f64) -> ConvergenceRow {
        ConvergenceRow {
            dx,
            dy: dx,
            sup_norm: err,
            restricted_sup: err,
            runtime_secs: 0.0,
            ops: OpCount::default(),
            drift_right: 0.0,
            drift_left: 0.0,
            invariant_violations: 0,
        }
    }

    #[test]
    fn slope_of_power_laws() {
        let dx = [0.1, 0.04, 0.008];
        let linear: Vec<f64> = dx.iter().map(|d| 3.0 * d).collect();
        assert!((fit_slope(&dx, &linear) - 1.0).abs() < 1e-14);
        let root: Vec<f64> = dx.iter().map(|d| 0.2 * d.sqrt()).collect();
        assert!((fit_slope(&dx, &root) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn rows_are_sorted_coarse_first() {
        let r = ConvergenceReport::from_rows(vec![row(0.01, 0.1), row(0.1, 1.0), row(0.05, 0.5)]).unwrap();
        assert_eq!(r.rows.iter().map(|r| r.dx).collect::<Vec<_>>(), vec![0.1, 0.05, 0.01]);
        assert!(r.strictly_decreasing());
        assert!((r.slope - 1.0).abs() < 1e-12);
        assert!(r.table().starts_with("dx,dy,sup_err,restricted_err,slope\n0.1,"));
    }

    #[test]
    fn too_few_rows() {
        assert!(ConvergenceReport::from_rows(vec![row(0.1, 1.0), row(0.05, 0.5)]).is_err());
    }
}

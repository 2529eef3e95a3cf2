//! Direct simulation of sample paths: deterministic flow between switching
//! events, renewal intervals drawn from `ψ_s`, new states drawn from the
//! columns of the transition matrix.

use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Domain, IntervalDistribution, PdpModel, TransitionMatrix, VectorField};

/// Probability spacing of the inverse-CDF tables.
pub const TABLE_RESOLUTION: f64 = 1e-4;
/// Maximum step of the Runge–Kutta integrator for non-affine fields.
pub const RK4_MAX_STEP: f64 = 1e-3;
/// Allowed excursion outside `Ω` before a path is declared unconfined.
pub const CONFINEMENT_TOL: f64 = 1e-9;
/// Independent generator streams; fixed so results do not depend on the
/// number of threads.
pub const DEFAULT_STREAMS: u64 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum McError {
    #[error("confinement violated: x = {x} left the domain in state {state} at t = {t}")]
    ConfinementViolated { x: f64, state: usize, t: f64 },
    #[error("invalid Monte Carlo input: {0}")]
    InvalidInput(String),
}

/// Position, state, memory and time of one path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathState {
    pub x: f64,
    pub s: usize,
    pub y: f64,
    pub t: f64,
}

/// Inverse of an interval CDF, tabulated on a uniform probability grid and
/// linearly interpolated. The last cell is inverted by bisection.
#[derive(Debug, Clone)]
pub struct InverseCdfTable {
    dist: IntervalDistribution,
    times: Vec<f64>,
}

impl InverseCdfTable {
    pub fn new(dist: &IntervalDistribution) -> Self {
        let cells = (1.0 / TABLE_RESOLUTION).round() as usize;
        let mut times = Vec::with_capacity(cells);
        let mut lo = 0.0;
        for m in 0..cells {
            let p = m as f64 * TABLE_RESOLUTION;
            let t = if m == 0 { 0.0 } else { invert(dist, p, lo) };
            times.push(t);
            lo = t;
        }
        InverseCdfTable { dist: dist.clone(), times }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let pos = u / TABLE_RESOLUTION;
        let m = pos.floor() as usize;
        if m + 1 >= self.times.len() {
            return invert(&self.dist, u, *self.times.last().unwrap());
        }
        let w = pos - m as f64;
        self.times[m] + w * (self.times[m + 1] - self.times[m])
    }
}

/// Smallest `t ≥ lo` with `F(t) ≥ p`, by bracketing and bisection.
fn invert(dist: &IntervalDistribution, p: f64, lo: f64) -> f64 {
    let mut lo = lo;
    let mut hi = (lo * 2.0).max(1.0);
    while dist.cdf(hi) < p {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return hi;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dist.cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Interval sampler for one state.
#[derive(Debug, Clone)]
pub enum IntervalSampler {
    Exponential { rate: f64 },
    Table(InverseCdfTable),
}

impl IntervalSampler {
    pub fn new(dist: &IntervalDistribution) -> Self {
        match dist {
            IntervalDistribution::Exponential { rate } => IntervalSampler::Exponential { rate: *rate },
            other => IntervalSampler::Table(InverseCdfTable::new(other)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // u in (0, 1]
        let u = 1.0 - rng.random::<f64>();
        match self {
            IntervalSampler::Exponential { rate } => -u.ln() / rate,
            IntervalSampler::Table(table) => table.quantile(1.0 - u),
        }
    }
}

/// Draws one switching interval from `dist`.
pub fn sample_interval<R: Rng + ?Sized>(dist: &IntervalDistribution, rng: &mut R) -> f64 {
    IntervalSampler::new(dist).sample(rng)
}

/// Follows `ẋ = A(x)` for `dt_total`, exactly for affine fields and by
/// classical Runge–Kutta otherwise.
pub fn evolve_between_jumps(
    state: PathState,
    dt_total: f64,
    field: &VectorField,
    domain: &Domain,
) -> Result<PathState, McError> {
    if !(dt_total >= 0.0) {
        return Err(McError::InvalidInput(format!("negative flow time {dt_total}")));
    }
    if dt_total == 0.0 {
        return Ok(state);
    }
    let x = match field {
        VectorField::Affine { gamma, drift } => {
            if *gamma == 0.0 {
                state.x + drift * dt_total
            } else {
                let fixed = drift / gamma;
                fixed + (state.x - fixed) * (-gamma * dt_total).exp()
            }
        }
        VectorField::Custom(_) => {
            let steps = (dt_total / RK4_MAX_STEP).ceil().max(1.0) as usize;
            let h = dt_total / steps as f64;
            let mut x = state.x;
            for _ in 0..steps {
                let k1 = field.eval(x);
                let k2 = field.eval(x + 0.5 * h * k1);
                let k3 = field.eval(x + 0.5 * h * k2);
                let k4 = field.eval(x + h * k3);
                x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            x
        }
    };
    let t = state.t + dt_total;
    if !(x >= domain.omega_a - CONFINEMENT_TOL && x <= domain.omega_b + CONFINEMENT_TOL) {
        return Err(McError::ConfinementViolated { x, state: state.s, t });
    }
    Ok(PathState { x, s: state.s, y: state.y + dt_total, t })
}

/// Draws the next state from column `s_from` of `q`.
pub fn switch_state<R: Rng + ?Sized>(s_from: usize, q: &TransitionMatrix, rng: &mut R) -> usize {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    let mut last_possible = s_from;
    for s in 0..q.size() {
        let p = q.get(s, s_from);
        if p > 0.0 {
            acc += p;
            last_possible = s;
            if u < acc {
                return s;
            }
        }
    }
    last_possible
}

/// Fraction of paths with `X(T) ≤ x_k`, overall and per final state.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    pub n_paths: usize,
    /// `per_state[s][k]`: fraction with `X(T) ≤ x_k` and final state `s`.
    pub per_state: Vec<Vec<f64>>,
}

impl EmpiricalCdf {
    /// Fraction of paths that ended in state `s`.
    pub fn state_fraction(&self, s: usize) -> f64 {
        *self.per_state[s].last().unwrap_or(&0.0)
    }

    /// `sup_k |values_k − other_k|`.
    pub fn sup_distance(&self, other: &[f64]) -> f64 {
        sup_distance(&self.values, other)
    }

    /// Dvoretzky–Kiefer–Wolfowitz half-width at confidence `1 − alpha`.
    pub fn dkw_band(&self, alpha: f64) -> f64 {
        ((2.0 / alpha).ln() / (2.0 * self.n_paths as f64)).sqrt()
    }
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_paths: usize,
    pub seed: u64,
    pub streams: u64,
    /// Starting position of every path.
    pub x0: f64,
}

impl McConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        McConfig { n_paths, seed, streams: DEFAULT_STREAMS, x0: 0.0 }
    }
}

struct PathSimulator<'a> {
    model: &'a PdpModel,
    samplers: Vec<IntervalSampler>,
}

impl PathSimulator<'_> {
    fn final_state<R: Rng>(&self, t_end: f64, x0: f64, rng: &mut R) -> Result<PathState, McError> {
        let states = self.model.num_states();
        let s0 = rng.random_range(0..states);
        let mut state = PathState { x: x0, s: s0, y: 0.0, t: 0.0 };
        loop {
            let tau = self.samplers[state.s].sample(rng);
            let remaining = t_end - state.t;
            if tau >= remaining {
                return evolve_between_jumps(state, remaining, &self.model.states[state.s].field, &self.model.domain);
            }
            state = evolve_between_jumps(state, tau, &self.model.states[state.s].field, &self.model.domain)?;
            state.s = switch_state(state.s, &self.model.q, rng);
            state.y = 0.0;
        }
    }
}

/// Simulates `config.n_paths` paths to time `t_end` and tabulates the
/// empirical distribution of `X(t_end)` on `x_grid`.
///
/// Paths start at `x0` in a uniformly drawn state. They are split into
/// `config.streams` contiguous blocks; block `b` uses a ChaCha8 generator
/// seeded with `config.seed` on stream `b`, so the result is fixed by the
/// seed alone. Blocks run on scoped threads and their counts are summed.
pub fn run_paths(model: &PdpModel, t_end: f64, x_grid: &[f64], config: McConfig) -> Result<EmpiricalCdf, McError> {
    if config.n_paths == 0 || config.streams == 0 {
        return Err(McError::InvalidInput("need at least one path and one stream".into()));
    }
    if !(t_end >= 0.0) {
        return Err(McError::InvalidInput(format!("negative horizon {t_end}")));
    }
    if x_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(McError::InvalidInput("x grid must be sorted".into()));
    }
    let sim = PathSimulator { model, samplers: model.states.iter().map(|s| IntervalSampler::new(&s.interval_pdf)).collect() };
    let states = model.num_states();
    let streams = config.streams.min(config.n_paths as u64) as usize;
    let base = config.n_paths / streams;
    let extra = config.n_paths % streams;

    let run_block = |block: usize| -> Result<Vec<Vec<u64>>, McError> {
        let count = base + usize::from(block < extra);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(block as u64);
        // finals[s] = final positions of paths ending in s
        let mut finals: Vec<Vec<f64>> = vec![Vec::new(); states];
        for _ in 0..count {
            let end = sim.final_state(t_end, config.x0, &mut rng)?;
            finals[end.s].push(end.x);
        }
        Ok(finals
            .into_iter()
            .map(|mut xs| {
                xs.sort_by(f64::total_cmp);
                x_grid.iter().map(|&g| xs.partition_point(|&x| x <= g) as u64).collect()
            })
            .collect())
    };

    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(streams);
    let results: Vec<Result<Vec<Vec<u64>>, McError>> = if workers <= 1 {
        (0..streams).map(run_block).collect()
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let run_block = &run_block;
                    scope.spawn(move || (w..streams).step_by(workers).map(|b| (b, run_block(b))).collect::<Vec<_>>())
                })
                .collect();
            let mut out: Vec<_> = handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect();
            out.sort_by_key(|(b, _)| *b);
            out.into_iter().map(|(_, r)| r).collect()
        })
    };

    let mut counts = vec![vec![0u64; x_grid.len()]; states];
    for block in results {
        for (s, row) in block?.into_iter().enumerate() {
            for (c, v) in counts[s].iter_mut().zip(row) {
                *c += v;
            }
        }
    }
    let n = config.n_paths as f64;
    let per_state: Vec<Vec<f64>> = counts.iter().map(|row| row.iter().map(|&c| c as f64 / n).collect()).collect();
    let values = (0..x_grid.len()).map(|k| counts.iter().map(|row| row[k]).sum::<u64>() as f64 / n).collect();
    Ok(EmpiricalCdf { nodes: x_grid.to_vec(), values, n_paths: config.n_paths, per_state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{builtin_scenario, Scenario};

    #[test]
    fn affine_flow_is_exact() {
        let domain = Domain::new(-1.0, 1.0, 10.0).unwrap();
        let start = PathState { x: 0.0, s: 0, y: 0.0, t: 0.0 };
        let up = evolve_between_jumps(start, 2f64.ln(), &VectorField::affine(1.0, 1.0), &domain).unwrap();
        assert!((up.x - 0.5).abs() < 1e-15);
        assert_eq!(evolve_between_jumps(start, 0.0, &VectorField::affine(1.0, 1.0), &domain).unwrap(), start);
        let down = evolve_between_jumps(start, 50.0, &VectorField::affine(1.0, -1.0), &domain).unwrap();
        assert!((down.x + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rk4_matches_affine() {
        let domain = Domain::new(-1.0, 1.0, 10.0).unwrap();
        let start = PathState { x: 0.2, s: 0, y: 0.0, t: 0.0 };
        let exact = evolve_between_jumps(start, 1.3, &VectorField::affine(1.0, -1.0), &domain).unwrap();
        let rk = evolve_between_jumps(start, 1.3, &VectorField::custom(|x| -(1.0 + x)), &domain).unwrap();
        assert!((exact.x - rk.x).abs() < 1e-13);
    }

    #[test]
    fn leaving_the_domain_is_an_error() {
        let domain = Domain::new(-1.0, 1.0, 10.0).unwrap();
        let start = PathState { x: 0.0, s: 0, y: 0.0, t: 0.0 };
        let err = evolve_between_jumps(start, 2.0, &VectorField::affine(0.0, 1.0), &domain).unwrap_err();
        assert!(matches!(err, McError::ConfinementViolated { .. }));
    }

    #[test]
    fn switching_follows_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = TransitionMatrix::swap();
        for _ in 0..100 {
            assert_eq!(switch_state(1, &q, &mut rng), 0);
            assert_eq!(switch_state(0, &q, &mut rng), 1);
        }
        let id = TransitionMatrix::identity(3);
        for s in 0..3 {
            assert_eq!(switch_state(s, &id, &mut rng), s);
        }
    }

    #[test]
    fn table_inverts_closed_form() {
        let table = InverseCdfTable::new(&IntervalDistribution::McFadden);
        for u in [0.01f64, 0.2, 0.5, 0.77, 0.99, 0.99995] {
            // F(t) = (1 − e^{−t})³
            let exact = -(1.0 - u.cbrt()).ln();
            assert!((table.quantile(u) - exact).abs() < 1e-4, "u = {u}");
        }
    }

    #[test]
    fn zero_horizon_is_a_step() {
        let m = builtin_scenario(Scenario::McFaddenFilter);
        let grid = [-0.5, -1e-12, 0.0, 0.5];
        let emp = run_paths(&m, 0.0, &grid, McConfig::new(100, 3)).unwrap();
        assert_eq!(emp.values, vec![0.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn reproducible_for_a_seed() {
        let m = builtin_scenario(Scenario::GammaFilter);
        let grid: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let a = run_paths(&m, 3.0, &grid, McConfig::new(2000, 42)).unwrap();
        let b = run_paths(&m, 3.0, &grid, McConfig::new(2000, 42)).unwrap();
        assert_eq!(a, b);
        let c = run_paths(&m, 3.0, &grid, McConfig::new(2000, 43)).unwrap();
        assert_ne!(a, c);
        assert_eq!(*a.values.last().unwrap(), 1.0);
    }
}

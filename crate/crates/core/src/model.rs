//! Local characteristics of a piecewise-deterministic process: vector fields,
//! interval densities (and the hazard functions derived from them), the
//! transition matrix and the spatial domain.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::quad;

/// Absolute tolerance on column sums of the transition matrix.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Tolerance on `∫ψ = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-8;
/// Number of samples used to bound hazards and fields.
pub const HAZARD_SAMPLES: usize = 10_000;
/// Survival values below this are treated as exhausted.
pub const SURVIVAL_FLOOR: f64 = 1e-300;

const LIPSCHITZ_PAIRS: usize = 1_000;
const LIPSCHITZ_LIMIT: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("transition matrix not stochastic: column {column} sums to {sum}")]
    NotStochastic { column: usize, sum: f64 },
    #[error("transition probability q[{to}][{from}] = {value} outside [0, 1]")]
    ProbabilityOutOfRange { to: usize, from: usize, value: f64 },
    #[error("not a probability density: integral is {integral}")]
    NotADensity { integral: f64 },
    #[error("hazard domain exhausted: survival underflows at y = {at}")]
    HazardDomainExhausted { at: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("field of state {state} is not Lipschitz on the domain (quotient {quotient})")]
    NotLipschitz { state: usize, quotient: f64 },
    #[error("invalid initial distribution: {0}")]
    InvalidInitialCdf(String),
}

/// Spatial interval `[omega_a, omega_b]` and time horizon `[0, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub omega_a: f64,
    pub omega_b: f64,
    pub t_end: f64,
}

impl Domain {
    /// Initial time; the process always starts at zero.
    pub const T0: f64 = 0.0;

    pub fn new(omega_a: f64, omega_b: f64, t_end: f64) -> Result<Self, ModelError> {
        let d = Domain { omega_a, omega_b, t_end };
        d.check()?;
        Ok(d)
    }

    pub fn check(&self) -> Result<(), ModelError> {
        if !(self.omega_a.is_finite() && self.omega_b.is_finite() && self.omega_a < self.omega_b) {
            return Err(ModelError::InvalidDomain(format!(
                "need omega_a < omega_b, got [{}, {}]",
                self.omega_a, self.omega_b
            )));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(ModelError::InvalidDomain(format!("horizon must be positive, got {}", self.t_end)));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.omega_b - self.omega_a
    }
}

/// Interval density given by samples `(y, ψ(y))`, linearly interpolated and
/// zero past the last sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPdf {
    ys: Vec<f64>,
    psi: Vec<f64>,
    cumulative: Vec<f64>,
}

impl TabulatedPdf {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        if points.len() < 2 {
            return Err(ModelError::InvalidParameter("tabulated density needs at least two samples".into()));
        }
        if points[0].0 != 0.0 {
            return Err(ModelError::InvalidParameter("tabulated density must start at y = 0".into()));
        }
        let mut ys = Vec::with_capacity(points.len());
        let mut psi = Vec::with_capacity(points.len());
        for (i, &(y, p)) in points.iter().enumerate() {
            if !(y.is_finite() && p.is_finite()) || p < 0.0 {
                return Err(ModelError::InvalidParameter(format!("bad sample ({y}, {p})")));
            }
            if i > 0 && y <= ys[i - 1] {
                return Err(ModelError::InvalidParameter("sample abscissae must increase".into()));
            }
            ys.push(y);
            psi.push(p);
        }
        let mut cumulative = vec![0.0; ys.len()];
        for i in 1..ys.len() {
            cumulative[i] = cumulative[i - 1] + 0.5 * (ys[i] - ys[i - 1]) * (psi[i] + psi[i - 1]);
        }
        Ok(TabulatedPdf { ys, psi, cumulative })
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.ys.iter().copied().zip(self.psi.iter().copied())
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn segment(&self, t: f64) -> Option<usize> {
        if t < 0.0 || t >= *self.ys.last().unwrap() {
            return None;
        }
        Some(self.ys.partition_point(|&y| y <= t) - 1)
    }

    pub fn pdf(&self, t: f64) -> f64 {
        match self.segment(t) {
            None => 0.0,
            Some(i) => {
                let w = (t - self.ys[i]) / (self.ys[i + 1] - self.ys[i]);
                self.psi[i] + w * (self.psi[i + 1] - self.psi[i])
            }
        }
    }

    /// `∫_0^t ψ` with the trapezoid rule (exact for the interpolant).
    pub fn integral_to(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.segment(t) {
            None => self.total(),
            Some(i) => self.cumulative[i] + 0.5 * (t - self.ys[i]) * (self.psi[i] + self.pdf(t)),
        }
    }

    pub fn survival(&self, t: f64) -> f64 {
        (self.total() - self.integral_to(t)).max(0.0)
    }

    fn mean(&self) -> f64 {
        self.ys
            .windows(2)
            .zip(self.psi.windows(2))
            .map(|(y, p)| {
                let (a, b) = (y[0], y[1]);
                (b - a) / 6.0 * (p[0] * (2.0 * a + b) + p[1] * (a + 2.0 * b))
            })
            .sum()
    }
}

/// Density `ψ` of the time between switching events.
#[derive(Debug, Clone, PartialEq)]
pub enum IntervalDistribution {
    /// `ψ(t) = μ e^{−μt}`; constant hazard.
    Exponential { rate: f64 },
    /// `ψ(t) = 3 e^{−t} (1 − e^{−t})²`.
    McFadden,
    /// Shape-two gamma density `ψ(t) = μ² t e^{−μt}`.
    Gamma { rate: f64 },
    Tabulated(TabulatedPdf),
}

impl IntervalDistribution {
    pub fn pdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match self {
            Self::Exponential { rate } => rate * (-rate * t).exp(),
            Self::McFadden => {
                let u = -(-t).exp_m1();
                3.0 * (-t).exp() * u * u
            }
            Self::Gamma { rate } => rate * rate * t * (-rate * t).exp(),
            Self::Tabulated(tab) => tab.pdf(t),
        }
    }

    /// `∫_t^∞ ψ`.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        match self {
            Self::Exponential { rate } => (-rate * t).exp(),
            Self::McFadden => {
                // 1 − u³ = e^{−t}(1 + u + u²), u = 1 − e^{−t}
                let u = -(-t).exp_m1();
                (-t).exp() * (1.0 + u + u * u)
            }
            Self::Gamma { rate } => (1.0 + rate * t) * (-rate * t).exp(),
            Self::Tabulated(tab) => tab.survival(t),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Exponential { rate } => -(-rate * t).exp_m1(),
            Self::McFadden => (-(-t).exp_m1()).powi(3),
            Self::Tabulated(tab) => tab.integral_to(t).min(1.0),
            Self::Gamma { .. } => 1.0 - self.survival(t),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Exponential { rate } => 1.0 / rate,
            Self::McFadden => 11.0 / 6.0,
            Self::Gamma { rate } => 2.0 / rate,
            Self::Tabulated(tab) => tab.mean(),
        }
    }

    fn check_parameters(&self) -> Result<(), ModelError> {
        match self {
            Self::Exponential { rate } | Self::Gamma { rate } if !(rate.is_finite() && *rate > 0.0) => {
                Err(ModelError::InvalidParameter(format!("rate must be positive, got {rate}")))
            }
            _ => Ok(()),
        }
    }

    /// Checks parameters and that `ψ` integrates to one by numeric quadrature.
    pub fn validate(&self) -> Result<(), ModelError> {
        self.check_parameters()?;
        let integral = match self {
            Self::Tabulated(tab) => tab.total(),
            _ => quad::integrate_to_infinity(|t| self.pdf(t), 0.0, 1e-13, 1e-13).value,
        };
        if (integral - 1.0).abs() > NORMALIZATION_TOL {
            return Err(ModelError::NotADensity { integral });
        }
        Ok(())
    }
}

impl fmt::Display for IntervalDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { rate } => write!(f, "exponential:{rate}"),
            Self::McFadden => write!(f, "mcfadden"),
            Self::Gamma { rate } => write!(f, "gamma:{rate}"),
            Self::Tabulated(tab) => write!(f, "tabulated({} samples)", tab.ys.len()),
        }
    }
}

impl FromStr for IntervalDistribution {
    type Err = ModelError;

    /// Parses `exponential:RATE`, `mcfadden` or `gamma:RATE`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s, None),
        };
        let rate = || -> Result<f64, ModelError> {
            arg.ok_or_else(|| ModelError::InvalidParameter(format!("`{kind}` needs a rate")))?
                .parse::<f64>()
                .map_err(|e| ModelError::InvalidParameter(format!("bad rate in `{s}`: {e}")))
        };
        let dist = match kind {
            "exponential" | "poisson" => Self::Exponential { rate: rate()? },
            "mcfadden" => Self::McFadden,
            "gamma" => Self::Gamma { rate: rate()? },
            other => return Err(ModelError::InvalidParameter(format!("unknown interval density `{other}`"))),
        };
        dist.check_parameters()?;
        Ok(dist)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum HazardKind {
    Constant(f64),
    McFadden,
    Gamma { rate: f64 },
    Tabulated(TabulatedPdf),
}

/// Switching rate `λ(y) = ψ(y) / ∫_y^∞ ψ` as a function of the memory `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardFn {
    kind: HazardKind,
    pub lambda_at_zero: f64,
    pub lambda_sup: f64,
    pub lambda_inf: f64,
}

impl HazardFn {
    /// A constant hazard. `rate = 0` gives a state that never switches.
    pub fn constant(rate: f64) -> Self {
        HazardFn { kind: HazardKind::Constant(rate), lambda_at_zero: rate, lambda_sup: rate, lambda_inf: rate }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match &self.kind {
            HazardKind::Constant(rate) => *rate,
            HazardKind::McFadden => {
                let u = -(-y).exp_m1();
                3.0 * u * u / (1.0 + u + u * u)
            }
            HazardKind::Gamma { rate } => rate * rate * y / (1.0 + rate * y),
            HazardKind::Tabulated(tab) => {
                let s = tab.survival(y);
                if s <= 0.0 {
                    0.0
                } else {
                    tab.pdf(y) / s
                }
            }
        }
    }

    fn with_bounds(kind: HazardKind, t_max: f64) -> Self {
        let mut h = HazardFn { kind, lambda_at_zero: 0.0, lambda_sup: f64::NEG_INFINITY, lambda_inf: f64::INFINITY };
        for i in 0..=HAZARD_SAMPLES {
            let v = h.eval(t_max * i as f64 / HAZARD_SAMPLES as f64);
            h.lambda_sup = h.lambda_sup.max(v);
            h.lambda_inf = h.lambda_inf.min(v);
        }
        h.lambda_at_zero = h.eval(0.0);
        h
    }
}

/// Builds the hazard function of `dist` on `[0, t_max]`.
///
/// Closed forms are used for the named densities; tabulated densities are
/// divided pointwise by their trapezoid survival integral. The bounds are
/// taken from a dense sample of the interval.
pub fn hazard_from_pdf(dist: &IntervalDistribution, t_max: f64) -> Result<HazardFn, ModelError> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(ModelError::InvalidParameter(format!("t_max must be positive, got {t_max}")));
    }
    dist.validate()?;
    // Survival is nonincreasing, so checking the right end is enough.
    if dist.survival(t_max) < SURVIVAL_FLOOR {
        let at = match dist {
            IntervalDistribution::Tabulated(tab) => *tab.ys.last().unwrap(),
            _ => t_max,
        };
        return Err(ModelError::HazardDomainExhausted { at: at.min(t_max) });
    }
    let kind = match dist {
        IntervalDistribution::Exponential { rate } => return Ok(HazardFn::constant(*rate)),
        IntervalDistribution::McFadden => HazardKind::McFadden,
        IntervalDistribution::Gamma { rate } => HazardKind::Gamma { rate: *rate },
        IntervalDistribution::Tabulated(tab) => HazardKind::Tabulated(tab.clone()),
    };
    Ok(HazardFn::with_bounds(kind, t_max))
}

/// Drift `A_s(x)` followed between switching events.
#[derive(Clone)]
pub enum VectorField {
    /// `A(x) = −γ x + W`.
    Affine { gamma: f64, drift: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl VectorField {
    pub fn affine(gamma: f64, drift: f64) -> Self {
        VectorField::Affine { gamma, drift }
    }

    pub fn custom<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        VectorField::Custom(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            VectorField::Affine { gamma, drift } => -gamma * x + drift,
            VectorField::Custom(f) => f(x),
        }
    }

    /// `max |A|` over `[a, b]`: exact for affine fields, sampled otherwise.
    pub fn bound_on(&self, a: f64, b: f64) -> f64 {
        match self {
            VectorField::Affine { .. } => self.eval(a).abs().max(self.eval(b).abs()),
            VectorField::Custom(_) => (0..=HAZARD_SAMPLES)
                .map(|i| self.eval(a + (b - a) * i as f64 / HAZARD_SAMPLES as f64).abs())
                .fold(0.0, f64::max),
        }
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VectorField::Affine { gamma, drift } => write!(f, "Affine(-{gamma} x + {drift})"),
            VectorField::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// One dynamical state: its drift and interval density.
#[derive(Debug, Clone)]
pub struct StateDef {
    pub field: VectorField,
    pub interval_pdf: IntervalDistribution,
    /// `max_Ω |A_s|`.
    pub field_bound: f64,
}

impl StateDef {
    pub fn new(field: VectorField, interval_pdf: IntervalDistribution, domain: &Domain) -> Self {
        let field_bound = field.bound_on(domain.omega_a, domain.omega_b);
        StateDef { field, interval_pdf, field_bound }
    }
}

/// Column-stochastic matrix: `get(s, j)` is the probability of switching
/// into state `s` from state `j`, and every column sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    size: usize,
    // row-major: data[s * size + j] = q_{sj}
    data: Vec<f64>,
}

impl TransitionMatrix {
    /// `rows[s][j] = q_{sj}`.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let size = rows.len();
        if size == 0 {
            return Err(ModelError::DimensionMismatch("transition matrix is empty".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != size) {
            return Err(ModelError::DimensionMismatch(format!(
                "transition matrix row has {} entries, expected {size}",
                bad.len()
            )));
        }
        let m = TransitionMatrix { size, data: rows.into_iter().flatten().collect() };
        m.check()?;
        Ok(m)
    }

    pub fn identity(size: usize) -> Self {
        let mut data = vec![0.0; size * size];
        for s in 0..size {
            data[s * size + s] = 1.0;
        }
        TransitionMatrix { size, data }
    }

    /// Two states that always swap: `q_12 = q_21 = 1`.
    pub fn swap() -> Self {
        TransitionMatrix { size: 2, data: vec![0.0, 1.0, 1.0, 0.0] }
    }

    /// `q_{sj} = 1/(S−1)` for `s ≠ j`, zero diagonal.
    pub fn uniform_off_diagonal(size: usize) -> Result<Self, ModelError> {
        if size < 2 {
            return Err(ModelError::DimensionMismatch("off-diagonal matrix needs at least two states".into()));
        }
        let p = 1.0 / (size - 1) as f64;
        let mut data = vec![p; size * size];
        for s in 0..size {
            data[s * size + s] = 0.0;
        }
        Ok(TransitionMatrix { size, data })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn get(&self, to: usize, from: usize) -> f64 {
        self.data[to * self.size + from]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.size).map(<[f64]>::to_vec).collect()
    }

    pub fn check(&self) -> Result<(), ModelError> {
        for to in 0..self.size {
            for from in 0..self.size {
                let value = self.get(to, from);
                if !(0.0..=1.0).contains(&value) {
                    return Err(ModelError::ProbabilityOutOfRange { to, from, value });
                }
            }
        }
        for column in 0..self.size {
            let sum: f64 = (0..self.size).map(|s| self.get(s, column)).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(ModelError::NotStochastic { column, sum });
            }
        }
        Ok(())
    }
}

/// Initial distribution function `F_0(x)`, shared by all states.
#[derive(Clone)]
pub enum InitialCdf {
    /// Unit step at `at`, taking the value ½ exactly at the step.
    Heaviside { at: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl InitialCdf {
    const STEP_TOL: f64 = 1e-9;

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            InitialCdf::Heaviside { at } => {
                if (x - at).abs() <= Self::STEP_TOL * (1.0 + at.abs()) {
                    0.5
                } else if x < *at {
                    0.0
                } else {
                    1.0
                }
            }
            InitialCdf::Custom(f) => f(x),
        }
    }
}

impl Default for InitialCdf {
    fn default() -> Self {
        InitialCdf::Heaviside { at: 0.0 }
    }
}

impl fmt::Debug for InitialCdf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCdf::Heaviside { at } => write!(f, "Heaviside(at = {at})"),
            InitialCdf::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// A complete process definition.
#[derive(Debug, Clone)]
pub struct PdpModel {
    pub states: Vec<StateDef>,
    pub q: TransitionMatrix,
    pub domain: Domain,
    pub initial_cdf: InitialCdf,
}

impl PdpModel {
    pub fn new(states: Vec<StateDef>, q: TransitionMatrix, domain: Domain) -> Result<Self, ModelError> {
        domain.check()?;
        if states.is_empty() {
            return Err(ModelError::DimensionMismatch("a model needs at least one state".into()));
        }
        if q.size() != states.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "{} states but a {}×{} transition matrix",
                states.len(),
                q.size(),
                q.size()
            )));
        }
        Ok(PdpModel { states, q, domain, initial_cdf: InitialCdf::default() })
    }

    /// Convenience constructor; field bounds are computed over the domain.
    pub fn from_parts(
        fields: Vec<(VectorField, IntervalDistribution)>,
        q: TransitionMatrix,
        domain: Domain,
    ) -> Result<Self, ModelError> {
        let states = fields.into_iter().map(|(f, d)| StateDef::new(f, d, &domain)).collect();
        PdpModel::new(states, q, domain)
    }

    pub fn with_initial_cdf(mut self, initial_cdf: InitialCdf) -> Self {
        self.initial_cdf = initial_cdf;
        self
    }

    /// Replaces the horizon, keeping the spatial interval.
    pub fn with_horizon(mut self, t_end: f64) -> Result<Self, ModelError> {
        self.domain = Domain::new(self.domain.omega_a, self.domain.omega_b, t_end)?;
        Ok(self)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// `M = max_l max_Ω |A_l|`.
    pub fn field_bound(&self) -> f64 {
        self.states.iter().map(|s| s.field_bound).fold(0.0, f64::max)
    }

    pub fn hazards(&self) -> Result<Vec<HazardFn>, ModelError> {
        self.states.iter().map(|s| hazard_from_pdf(&s.interval_pdf, self.domain.t_end)).collect()
    }
}

/// Non-fatal findings of [`validate_model`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub num_states: usize,
    /// Largest sampled difference quotient per state.
    pub lipschitz_estimates: Vec<f64>,
    pub confinement_warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_confined(&self) -> bool {
        self.confinement_warnings.is_empty()
    }
}

/// Checks stochasticity, normalization of every `ψ`, sampled Lipschitz
/// continuity of the fields and the initial distribution. Fields that point
/// outward at an end of `Ω`, or whose fixed point lies outside `Ω`, produce a
/// warning: the process is then not guaranteed to stay confined.
pub fn validate_model(m: &PdpModel) -> Result<ValidationReport, ModelError> {
    m.domain.check()?;
    if m.q.size() != m.states.len() {
        return Err(ModelError::DimensionMismatch("transition matrix size differs from state count".into()));
    }
    m.q.check()?;
    let (a, b) = (m.domain.omega_a, m.domain.omega_b);
    let h = (b - a) / LIPSCHITZ_PAIRS as f64;
    let mut lipschitz_estimates = Vec::with_capacity(m.states.len());
    let mut confinement_warnings = Vec::new();
    for (idx, state) in m.states.iter().enumerate() {
        state.interval_pdf.validate()?;
        let mut quotient = 0.0f64;
        let mut prev = state.field.eval(a);
        for i in 1..=LIPSCHITZ_PAIRS {
            let next = state.field.eval(a + h * i as f64);
            let qk = ((next - prev) / h).abs();
            if !qk.is_finite() || qk > LIPSCHITZ_LIMIT {
                return Err(ModelError::NotLipschitz { state: idx, quotient: qk });
            }
            quotient = quotient.max(qk);
            prev = next;
        }
        lipschitz_estimates.push(quotient);

        let (left, right) = (state.field.eval(a), state.field.eval(b));
        if left < 0.0 {
            confinement_warnings.push(format!("state {idx}: field points outward at omega_a (A = {left})"));
        }
        if right > 0.0 {
            confinement_warnings.push(format!("state {idx}: field points outward at omega_b (A = {right})"));
        }
        if let VectorField::Affine { gamma, drift } = state.field {
            if gamma != 0.0 {
                let fixed = drift / gamma;
                if !(a..=b).contains(&fixed) {
                    confinement_warnings.push(format!("state {idx}: fixed point {fixed} lies outside the domain"));
                }
                if gamma < 0.0 {
                    confinement_warnings.push(format!("state {idx}: fixed point {fixed} is repelling"));
                }
            }
        }
    }

    let g_left = m.initial_cdf.eval(a);
    let g_right = m.initial_cdf.eval(b);
    if g_left.abs() > 1e-12 || (g_right - 1.0).abs() > 1e-12 {
        return Err(ModelError::InvalidInitialCdf(format!(
            "expected F0(omega_a) = 0 and F0(omega_b) = 1, got {g_left} and {g_right}"
        )));
    }
    let mut prev = g_left;
    for i in 1..=LIPSCHITZ_PAIRS {
        let g = m.initial_cdf.eval(a + h * i as f64);
        if g < prev - 1e-12 {
            return Err(ModelError::InvalidInitialCdf("initial distribution decreases".into()));
        }
        prev = g;
    }

    Ok(ValidationReport { num_states: m.states.len(), lipschitz_estimates, confinement_warnings })
}

/// The three reference problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// Four-state RC filter with exponential (Markovian) switching.
    PoissonRc4,
    /// Dichotomous-noise filter with McFadden intervals.
    McFaddenFilter,
    /// Dichotomous-noise filter with shape-two gamma intervals, `μ = 1/2`.
    GammaFilter,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::PoissonRc4, Scenario::McFaddenFilter, Scenario::GammaFilter];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::PoissonRc4 => "poisson-rc4",
            Scenario::McFaddenFilter => "mcfadden",
            Scenario::GammaFilter => "gamma",
        }
    }

    /// Horizon of the reference snapshot runs.
    pub fn default_horizon(self) -> f64 {
        match self {
            Scenario::PoissonRc4 => 20.0,
            Scenario::McFaddenFilter => 7.37,
            Scenario::GammaFilter => 12.0,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| ModelError::InvalidParameter(format!("unknown scenario `{s}`")))
    }
}

/// Rate of the gamma interval density in [`Scenario::GammaFilter`].
pub const GAMMA_SCENARIO_RATE: f64 = 0.5;

pub fn builtin_scenario(name: Scenario) -> PdpModel {
    let horizon = name.default_horizon();
    let model = match name {
        Scenario::PoissonRc4 => {
            let domain = Domain { omega_a: -22.0, omega_b: 22.0, t_end: horizon };
            let fields = [1.0, -1.0, 2.0, -2.0]
                .into_iter()
                .map(|w| (VectorField::affine(0.1, w), IntervalDistribution::Exponential { rate: 0.2 }))
                .collect();
            PdpModel::from_parts(fields, TransitionMatrix::uniform_off_diagonal(4).unwrap(), domain)
        }
        Scenario::McFaddenFilter | Scenario::GammaFilter => {
            let dist = if name == Scenario::McFaddenFilter {
                IntervalDistribution::McFadden
            } else {
                IntervalDistribution::Gamma { rate: GAMMA_SCENARIO_RATE }
            };
            let domain = Domain { omega_a: -1.0, omega_b: 1.0, t_end: horizon };
            let fields = vec![(VectorField::affine(1.0, 1.0), dist.clone()), (VectorField::affine(1.0, -1.0), dist)];
            PdpModel::from_parts(fields, TransitionMatrix::swap(), domain)
        }
    };
    model.expect("built-in scenarios are well formed")
}

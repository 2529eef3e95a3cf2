//! Closed-form stationary distributions of the two dichotomous-noise filters.
//!
//! The McFadden filter has a polynomial equilibrium. The gamma filter's
//! equilibrium density is
//! `|Γ(1−r)|² / π^{3/2} · (1−x²)^{−1/2} · ₂F₁(r, r̄; ½; x²)` with
//! `r = (1+i)/4`, which needs a complex gamma function and a hypergeometric
//! series whose upper parameters are complex conjugates.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use thiserror::Error;

use crate::quad;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("argument {x} outside the domain {domain}")]
    Domain { x: f64, domain: &'static str },
    #[error("gamma function pole at {0}")]
    Pole(Complex64),
    #[error("hypergeometric series evaluated outside its domain at z = {0}")]
    OutsideSeriesDomain(f64),
    #[error("the expansion around z = 1 needs Re r = 1/4, got r = {0}")]
    NotLogarithmicCase(Complex64),
    #[error("hypergeometric series did not converge within {terms} terms at z = {z}")]
    SlowConvergence { z: f64, terms: usize },
}

const ENDPOINT_TOL: f64 = 1e-9;

fn clamp_unit(x: f64) -> Result<f64, AnalyticError> {
    if !(x.abs() <= 1.0 + ENDPOINT_TOL) {
        return Err(AnalyticError::Domain { x, domain: "[-1, 1]" });
    }
    Ok(x.clamp(-1.0, 1.0))
}

/// Stationary CDF of the McFadden filter, `(x³ + 21x + 22) / 44`.
pub fn mcfadden_cdf(x: f64) -> Result<f64, AnalyticError> {
    let x = clamp_unit(x)?;
    Ok((x * x * x + 21.0 * x + 22.0) / 44.0)
}

/// Stationary density of the McFadden filter, `3 (7 + x²) / 44`.
pub fn mcfadden_pdf(x: f64) -> Result<f64, AnalyticError> {
    let x = clamp_unit(x)?;
    Ok(3.0 * (7.0 + x * x) / 44.0)
}

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `Γ(z)` for complex `z`, with reflection for `Re z < ½`.
pub fn complex_gamma(z: Complex64) -> Result<Complex64, AnalyticError> {
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(AnalyticError::Pole(z));
    }
    Ok(gamma_unchecked(z))
}

fn gamma_unchecked(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        let pi = Complex64::new(PI, 0.0);
        return pi / ((pi * z).sin() * gamma_unchecked(1.0 - z));
    }
    let z = z - 1.0;
    let mut sum = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powc(z + 0.5) * (-t).exp() * sum
}

/// Complex digamma by upward recurrence and the asymptotic series.
fn complex_digamma(mut z: Complex64) -> Complex64 {
    let mut shift = Complex64::new(0.0, 0.0);
    while z.norm() < 12.0 || z.re < 6.0 {
        shift -= 1.0 / z;
        z += 1.0;
    }
    let w2 = 1.0 / (z * z);
    // Bernoulli terms B_{2k} / (2k z^{2k})
    let series = w2
        * (1.0 / 12.0
            - w2 * (1.0 / 120.0 - w2 * (1.0 / 252.0 - w2 * (1.0 / 240.0 - w2 * (1.0 / 132.0 - w2 * (691.0 / 32760.0))))));
    shift + z.ln() - 0.5 / z - series
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_6;
const SERIES_TERM_CAP: usize = 1_000_000;

/// `₂F₁(r, r̄; ½; z)` by its power series on `0 ≤ z < 1`.
///
/// With conjugate upper parameters every coefficient
/// `|(r)_n|² / ((½)_n n!)` is real and positive, so the sum is carried out in
/// real arithmetic. The remainder after a term `t` is below `t z / (1 − z)`;
/// summation stops when that bound falls under `1e-16` of the partial sum.
pub fn hyp2f1_conjugate(r: Complex64, z: f64) -> Result<f64, AnalyticError> {
    if !(0.0..1.0).contains(&z) {
        return Err(AnalyticError::OutsideSeriesDomain(z));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    let tail_factor = z / (1.0 - z);
    for n in 0..SERIES_TERM_CAP {
        if term * tail_factor <= 1e-16 * sum {
            return Ok(sum);
        }
        let nf = n as f64;
        term *= (r + nf).norm_sqr() / ((nf + 0.5) * (nf + 1.0)) * z;
        sum += term;
    }
    Err(AnalyticError::SlowConvergence { z, terms: SERIES_TERM_CAP })
}

/// `₂F₁(r, r̄; ½; z)` for `0 < z < 1` by the logarithmic expansion around
/// `z = 1` (valid because `c − a − b = 0`), given `1 − z` directly.
///
/// Only valid for `Re r = ¼`.
///
/// `F = Γ(½)/|Γ(r)|² Σ_n |(r)_n|²/(n!)² [2ψ(n+1) − 2 Re ψ(r+n) − ln(1−z)] (1−z)^n`.
pub fn hyp2f1_conjugate_near_one(r: Complex64, one_minus_z: f64) -> Result<f64, AnalyticError> {
    if !(one_minus_z > 0.0 && one_minus_z <= 1.0) {
        return Err(AnalyticError::OutsideSeriesDomain(1.0 - one_minus_z));
    }
    if (r.re - 0.25).abs() > 1e-14 {
        return Err(AnalyticError::NotLogarithmicCase(r));
    }
    let prefactor = PI.sqrt() / gamma_unchecked(r).norm_sqr();
    let log_w = one_minus_z.ln();
    let mut coeff = 1.0; // |(r)_n|² / (n!)² · w^n
    let mut psi_n1 = -EULER_GAMMA; // ψ(n + 1)
    let mut psi_rn = complex_digamma(r); // ψ(r + n)
    let mut sum = 0.0;
    for n in 0..SERIES_TERM_CAP {
        let term = coeff * (2.0 * psi_n1 - 2.0 * psi_rn.re - log_w);
        sum += term;
        if n > 2 && term.abs() <= 1e-17 * sum.abs() {
            return Ok(prefactor * sum);
        }
        let nf = n as f64;
        coeff *= (r + nf).norm_sqr() / ((nf + 1.0) * (nf + 1.0)) * one_minus_z;
        psi_n1 += 1.0 / (nf + 1.0);
        psi_rn += 1.0 / (r + nf);
    }
    Err(AnalyticError::SlowConvergence { z: 1.0 - one_minus_z, terms: SERIES_TERM_CAP })
}

/// Switch point between the power series and the expansion around one.
const NEAR_ONE_SWITCH: f64 = 0.5;

/// Stationary distribution of the dichotomous filter with gamma intervals
/// of rate ½.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaEquilibrium {
    pub r: Complex64,
    /// `|Γ(1−r)|² / π^{3/2}`.
    pub norm_const: f64,
    /// `∫_0^{π/2} ₂F₁(r, r̄; ½; sin²θ) dθ`.
    half_integral: f64,
}

impl Default for GammaEquilibrium {
    fn default() -> Self {
        Self::new()
    }
}

impl GammaEquilibrium {
    pub fn new() -> Self {
        let r = Complex64::new(0.25, 0.25);
        let norm_const = gamma_unchecked(1.0 - r).norm_sqr() / PI.powf(1.5);
        let mut eq = GammaEquilibrium { r, norm_const, half_integral: 1.0 };
        eq.half_integral = eq.angle_integral(0.0, 0.5 * PI);
        eq
    }

    /// Shared instance.
    pub fn get() -> &'static GammaEquilibrium {
        static EQ: OnceLock<GammaEquilibrium> = OnceLock::new();
        EQ.get_or_init(GammaEquilibrium::new)
    }

    /// `₂F₁(r, r̄; ½; z)` with `w = 1 − z` supplied separately so that
    /// values next to `z = 1` keep full precision.
    fn hyp(&self, z: f64, w: f64) -> f64 {
        let v = if z < NEAR_ONE_SWITCH { hyp2f1_conjugate(self.r, z) } else { hyp2f1_conjugate_near_one(self.r, w) };
        v.expect("arguments are inside the convergence domain")
    }

    fn angle_integral(&self, from: f64, to: f64) -> f64 {
        let integrand = |theta: f64| {
            let (s, c) = theta.sin_cos();
            self.hyp(s * s, c * c)
        };
        quad::integrate(integrand, from, to, 1e-13, 1e-14).value
    }

    pub fn pdf(&self, x: f64) -> Result<f64, AnalyticError> {
        if !(x.abs() < 1.0) {
            return Err(AnalyticError::Domain { x, domain: "(-1, 1)" });
        }
        let z = x * x;
        let w = (1.0 - x) * (1.0 + x);
        Ok(self.norm_const / w.sqrt() * self.hyp(z, w))
    }

    /// Mass of the unrenormalized density, `2 |Γ(1−r)|²/π^{3/2} ∫_0^{π/2} ₂F₁ dθ`.
    pub fn raw_mass(&self) -> f64 {
        2.0 * self.norm_const * self.half_integral
    }

    /// `∫_{−1}^{x} pdf` through `x = sin θ`, renormalized to total mass one.
    pub fn cdf(&self, x: f64) -> Result<f64, AnalyticError> {
        let x = clamp_unit(x)?;
        if x == 0.0 {
            return Ok(0.5);
        }
        let theta = x.abs().asin();
        let part = if x.abs() == 1.0 { self.half_integral } else { self.angle_integral(0.0, theta) };
        let half = 0.5 * part / self.half_integral;
        Ok(if x > 0.0 { 0.5 + half } else { 0.5 - half })
    }
}

pub fn gamma_equilibrium_pdf(x: f64) -> Result<f64, AnalyticError> {
    GammaEquilibrium::get().pdf(x)
}

pub fn gamma_equilibrium_cdf(x: f64) -> Result<f64, AnalyticError> {
    GammaEquilibrium::get().cdf(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcfadden_values() {
        assert_eq!(mcfadden_cdf(0.0).unwrap(), 0.5);
        assert_eq!(mcfadden_cdf(1.0).unwrap(), 1.0);
        assert_eq!(mcfadden_cdf(-1.0).unwrap(), 0.0);
        assert_eq!(mcfadden_pdf(0.0).unwrap(), 21.0 / 44.0);
        assert_eq!(mcfadden_pdf(1.0).unwrap(), 6.0 / 11.0);
        assert_eq!(mcfadden_pdf(-1.0).unwrap(), 24.0 / 44.0);
        assert!(mcfadden_cdf(1.5).is_err());
        assert!(mcfadden_pdf(-1.01).is_err());
    }

    #[test]
    fn mcfadden_pdf_is_derivative() {
        // d/dx (x³ + 21x + 22)/44 = (3x² + 21)/44 = 3(7 + x²)/44: compare coefficients.
        let cdf_coeffs = [22.0, 21.0, 0.0, 1.0];
        let derived: Vec<f64> = (1..4).map(|p| p as f64 * cdf_coeffs[p] / 44.0).collect();
        assert_eq!(derived, vec![21.0 / 44.0, 0.0, 3.0 / 44.0]);
        let h = 1e-4;
        for x in [-0.9, -0.3, 0.0, 0.5, 0.9] {
            let fd = (mcfadden_cdf(x + h).unwrap() - mcfadden_cdf(x - h).unwrap()) / (2.0 * h);
            assert!((fd - mcfadden_pdf(x).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn gamma_function_basics() {
        let one = complex_gamma(Complex64::new(1.0, 0.0)).unwrap();
        assert!((one - 1.0).norm() < 1e-14);
        let half = complex_gamma(Complex64::new(0.5, 0.0)).unwrap();
        assert!((half.re - PI.sqrt()).abs() < 1e-14);
        assert!(complex_gamma(Complex64::new(-2.0, 0.0)).is_err());
        assert!(complex_gamma(Complex64::new(0.0, 0.0)).is_err());
        // Γ(z+1) = z Γ(z)
        let z = Complex64::new(0.3, -1.7);
        let lhs = complex_gamma(z + 1.0).unwrap();
        let rhs = z * complex_gamma(z).unwrap();
        assert!((lhs - rhs).norm() < 1e-14 * lhs.norm());
    }

    #[test]
    fn digamma_recurrence_and_value() {
        let z = Complex64::new(0.25, 0.25);
        let d = complex_digamma(z + 1.0) - complex_digamma(z);
        assert!((d - 1.0 / z).norm() < 1e-13);
        assert!((complex_digamma(Complex64::new(1.0, 0.0)).re + EULER_GAMMA).abs() < 1e-14);
    }

    #[test]
    fn series_edges() {
        let r = Complex64::new(0.25, 0.25);
        assert_eq!(hyp2f1_conjugate(r, 0.0).unwrap(), 1.0);
        assert!(matches!(hyp2f1_conjugate(r, 1.0), Err(AnalyticError::OutsideSeriesDomain(_))));
        assert!(hyp2f1_conjugate(r, -0.1).is_err());
    }

    #[test]
    fn series_and_expansion_agree() {
        let r = Complex64::new(0.25, 0.25);
        for z in [0.3, 0.5, 0.7, 0.9, 0.95, 0.99] {
            let a = hyp2f1_conjugate(r, z).unwrap();
            let b = hyp2f1_conjugate_near_one(r, 1.0 - z).unwrap();
            assert!((a - b).abs() < 1e-13 * a, "z = {z}: {a} vs {b}");
        }
    }

    #[test]
    fn gamma_equilibrium_shape() {
        let eq = GammaEquilibrium::get();
        assert!((eq.pdf(0.0).unwrap() - eq.norm_const).abs() < 1e-16);
        assert_eq!(eq.pdf(0.3).unwrap(), eq.pdf(-0.3).unwrap());
        assert_eq!(eq.cdf(0.0).unwrap(), 0.5);
        assert_eq!(eq.cdf(1.0).unwrap(), 1.0);
        assert_eq!(eq.cdf(-1.0).unwrap(), 0.0);
        assert!((eq.raw_mass() - 1.0).abs() < 1e-8, "{}", eq.raw_mass());
        // U shape: larger near the ends than in the middle.
        assert!(eq.pdf(0.99).unwrap() > eq.pdf(0.5).unwrap());
        assert!(eq.pdf(0.5).unwrap() > eq.pdf(0.0).unwrap());
        assert!(eq.pdf(1.0).is_err());
    }
}

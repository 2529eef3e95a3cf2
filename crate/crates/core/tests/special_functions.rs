//! Special functions against values frozen from 30-digit mpmath runs
//! (`fixtures/special_functions.py` regenerates the table) and against an
//! independent double-exponential quadrature.

use num_complex::Complex64;
use pdp_core::analytic::{
    complex_gamma, gamma_equilibrium_cdf, gamma_equilibrium_pdf, hyp2f1_conjugate, hyp2f1_conjugate_near_one,
    mcfadden_cdf, mcfadden_pdf, GammaEquilibrium,
};
use pdp_core::model::{hazard_from_pdf, IntervalDistribution};
use quadrature::double_exponential;

const FIXTURES: &str = include_str!("fixtures/special_functions.txt");

fn fixtures(kind: &str) -> Vec<Vec<f64>> {
    FIXTURES
        .lines()
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            (it.next() == Some(kind)).then(|| it.map(|v| v.parse().unwrap()).collect())
        })
        .collect()
}

fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

#[test]
fn complex_gamma_matches_reference() {
    let rows = fixtures("gamma");
    assert_eq!(rows.len(), 25);
    for row in rows {
        let z = Complex64::new(row[0], row[1]);
        let want = Complex64::new(row[2], row[3]);
        let got = complex_gamma(z).unwrap();
        let err = (got - want).norm() / want.norm();
        assert!(err <= 1e-12, "Γ({z}) = {got}, expected {want}, rel {err:e}");
    }
}

#[test]
fn complex_gamma_poles() {
    for n in [0.0, -1.0, -7.0] {
        assert!(complex_gamma(Complex64::new(n, 0.0)).is_err());
    }
}

#[test]
fn hyp2f1_series_matches_reference() {
    let rows = fixtures("hyp2f1");
    assert_eq!(rows.len(), 25);
    for row in rows {
        let r = Complex64::new(row[0], row[1]);
        let got = hyp2f1_conjugate(r, row[2]).unwrap();
        let err = rel_err(got, row[3]);
        assert!(err <= 1e-12, "2F1 at r = {r}, z = {}: {got} vs {}, rel {err:e}", row[2], row[3]);
    }
}

#[test]
fn hyp2f1_near_one_matches_reference() {
    let rows = fixtures("hyp2f1_one");
    assert_eq!(rows.len(), 12);
    for row in rows {
        let r = Complex64::new(row[0], row[1]);
        let got = hyp2f1_conjugate_near_one(r, row[2]).unwrap();
        let err = rel_err(got, row[3]);
        assert!(err <= 1e-12, "2F1 at r = {r}, 1 - z = {}: {got} vs {}, rel {err:e}", row[2], row[3]);
    }
    assert!(hyp2f1_conjugate_near_one(Complex64::new(1.0, 0.5), 0.1).is_err());
    assert!(hyp2f1_conjugate(Complex64::new(0.25, 0.25), 1.0).is_err());
}

#[test]
fn gamma_equilibrium_cdf_matches_reference() {
    for row in fixtures("gamma_cdf") {
        let got = gamma_equilibrium_cdf(row[0]).unwrap();
        assert!((got - row[1]).abs() <= 1e-12, "F({}) = {got}, expected {}", row[0], row[1]);
    }
    assert_eq!(gamma_equilibrium_cdf(0.0).unwrap(), 0.5);
    assert_eq!(gamma_equilibrium_cdf(1.0).unwrap(), 1.0);
    assert_eq!(gamma_equilibrium_cdf(-1.0).unwrap(), 0.0);
}

#[test]
fn gamma_equilibrium_normalization() {
    let eq = GammaEquilibrium::get();
    assert!((eq.norm_const / 0.231449795345675225683093546771 - 1.0).abs() < 1e-14);
    assert!((eq.raw_mass() - 1.0).abs() < 1e-8, "{}", eq.raw_mass());
}

#[test]
fn gamma_cdf_against_tanh_sinh() {
    // F(0) = 1/2 by symmetry; the density is smooth on [0, 0.5].
    let pdf = |x: f64| gamma_equilibrium_pdf(x).unwrap();
    let out = double_exponential::integrate(pdf, 0.0, 0.5, 1e-14);
    let got = gamma_equilibrium_cdf(0.5).unwrap();
    assert!((0.5 + out.integral - got).abs() < 1e-13, "{} vs {got}", 0.5 + out.integral);
    assert!((got - 0.624055477316).abs() < 1e-12);
}

#[test]
fn mcfadden_equilibrium() {
    assert_eq!(mcfadden_cdf(-1.0).unwrap(), 0.0);
    assert_eq!(mcfadden_cdf(1.0).unwrap(), 1.0);
    assert_eq!(mcfadden_cdf(0.0).unwrap(), 0.5);
    let mass = double_exponential::integrate(|x| mcfadden_pdf(x).unwrap(), -1.0, 1.0, 1e-14).integral;
    assert!((mass - 1.0).abs() < 1e-13);
    let h = 1e-6;
    for x in [-0.8, -0.1, 0.3, 0.95] {
        let d = (mcfadden_cdf(x + h).unwrap() - mcfadden_cdf(x - h).unwrap()) / (2.0 * h);
        assert!((d - mcfadden_pdf(x).unwrap()).abs() < 1e-8);
    }
    assert!(mcfadden_cdf(1.1).is_err());
}

#[test]
fn interval_means() {
    let mean = |d: IntervalDistribution| double_exponential::integrate(|t| t * d.pdf(t), 0.0, 400.0, 1e-13).integral;
    assert!((mean(IntervalDistribution::McFadden) - 11.0 / 6.0).abs() < 1e-10);
    assert!((IntervalDistribution::McFadden.mean() - 11.0 / 6.0).abs() < 1e-10);
    assert!((mean(IntervalDistribution::Gamma { rate: 0.5 }) - 4.0).abs() < 1e-9);
    assert!((mean(IntervalDistribution::Exponential { rate: 0.2 }) - 5.0).abs() < 1e-7);
}

#[test]
fn mcfadden_hazard_tends_to_one() {
    // ψ / survival with u = 1 − e^{−t} reduces to 3u² / (1 + u + u²), whose
    // supremum is 1 (reached as t → ∞), not 4/9.
    let h = hazard_from_pdf(&IntervalDistribution::McFadden, 20.0).unwrap();
    for t in [0.0, 0.3, 1.0, 2.5, 7.0, 19.0] {
        let u = -(-t as f64).exp_m1();
        let want = 3.0 * u * u / (1.0 + u + u * u);
        assert!((h.eval(t) - want).abs() < 1e-12, "t = {t}");
    }
    assert_eq!(h.lambda_at_zero, 0.0);
    assert!(h.lambda_sup > 1.0 - 1e-8 && h.lambda_sup <= 1.0);
    assert!(h.eval(1.0) > 4.0 / 9.0);
}

#[test]
fn gamma_hazard_is_monotone() {
    let mu = 0.5;
    let h = hazard_from_pdf(&IntervalDistribution::Gamma { rate: mu }, 12.0).unwrap();
    let mut prev = -1.0;
    for i in 0..=120 {
        let t = 0.1 * i as f64;
        let v = h.eval(t);
        assert!((v - mu * mu * t / (1.0 + mu * t)).abs() < 1e-12, "t = {t}");
        assert!(v > prev);
        prev = v;
    }
    assert!(h.lambda_sup < mu);
}

#[test]
fn hazards_match_direct_quadrature() {
    use rand::{Rng, SeedableRng};
    let t_max = 20.0;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    for dist in [
        IntervalDistribution::Exponential { rate: 0.2 },
        IntervalDistribution::McFadden,
        IntervalDistribution::Gamma { rate: 0.5 },
    ] {
        let h = hazard_from_pdf(&dist, t_max).unwrap();
        for _ in 0..100 {
            let y: f64 = rng.random_range(0.0..t_max);
            // The tail past y + 400 is below 1e-30 of the survival for all three laws.
            let survival = double_exponential::integrate(|t| dist.pdf(t), y, y + 400.0, 1e-16).integral;
            let want = dist.pdf(y) / survival;
            let err = if want == 0.0 { h.eval(y).abs() } else { rel_err(h.eval(y), want) };
            assert!(err < 1e-6, "{dist} at y = {y}: {} vs {want}", h.eval(y));
        }
    }
}

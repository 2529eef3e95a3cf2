//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Used for density normalization checks and for the equilibrium CDF of the
//! gamma scenario, whose integrand carries an integrable logarithmic
//! singularity at one endpoint. Bisection never evaluates the endpoints, so
//! such singularities are handled by refinement alone.

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_DEPTH: u32 = 60;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = half * XGK[i];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    (value, error)
}

/// Integrates `f` over `[a, b]` until the estimated absolute error is below
/// `abs_tol` or below `rel_tol` times the magnitude of the result.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    if a == b {
        return Integral { value: 0.0, error: 0.0, evaluations: 0 };
    }
    let (whole, whole_err) = gk15(&f, a, b);
    let mut evaluations = 15;
    let tol = abs_tol.max(rel_tol * whole.abs());
    let mut value = 0.0;
    let mut error = 0.0;
    // (lo, hi, estimate, error, depth)
    let mut stack = vec![(a, b, whole, whole_err, 0u32)];
    while let Some((lo, hi, est, err, depth)) = stack.pop() {
        let local_tol = tol * (hi - lo).abs() / (b - a).abs();
        if err <= local_tol.max(f64::EPSILON * est.abs()) || depth >= MAX_DEPTH {
            value += est;
            error += err;
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let (left, left_err) = gk15(&f, lo, mid);
        let (right, right_err) = gk15(&f, mid, hi);
        evaluations += 30;
        stack.push((lo, mid, left, left_err, depth + 1));
        stack.push((mid, hi, right, right_err, depth + 1));
    }
    Integral { value, error, evaluations }
}

/// Integrates `f` over `[a, ∞)` through the map `t = a + s / (1 − s)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, abs_tol: f64, rel_tol: f64) -> Integral {
    let mapped = |s: f64| {
        let one_minus = 1.0 - s;
        let t = a + s / one_minus;
        let v = f(t) / (one_minus * one_minus);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(mapped, 0.0, 1.0, abs_tol, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, 1e-14, 0.0);
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0) + 3.0;
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn log_endpoint_singularity() {
        // ∫_0^1 ln x dx = -1
        let r = integrate(|x: f64| x.ln(), 0.0, 1.0, 1e-12, 0.0);
        assert!((r.value + 1.0).abs() < 1e-11, "{}", r.value);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_to_infinity(|t: f64| 0.2 * (-0.2 * t).exp(), 0.0, 1e-13, 0.0);
        assert!((r.value - 1.0).abs() < 1e-11);
        let r = integrate_to_infinity(|t: f64| 0.2 * (-0.2 * t).exp(), 3.0, 1e-13, 0.0);
        assert!((r.value - (-0.6f64).exp()).abs() < 1e-11);
    }
}

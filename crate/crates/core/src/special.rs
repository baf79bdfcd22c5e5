//! Scalar special functions used by the taper synthesis: complete elliptic
//! integrals via the arithmetic-geometric mean, the modified Bessel ratio
//! I1(x)/x, and adaptive Gauss-Kronrod quadrature.

use crate::{Error, Result};

const AGM_MAX_ITER: usize = 40;

/// Complete elliptic integral of the first kind K(k), modulus convention
/// (the parameter is m = k^2).
///
/// Uses K(k) = pi / (2 AGM(1, sqrt(1 - k^2))); the AGM converges
/// quadratically, giving relative error at the 1e-15 level.
pub fn ellipk_modulus(k: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&k) {
        return Err(Error::DomainError(format!(
            "elliptic modulus must lie in [0, 1), got {k}"
        )));
    }
    let kp = ((1.0 - k) * (1.0 + k)).sqrt();
    Ok(std::f64::consts::PI / (2.0 * agm(1.0, kp)))
}

fn agm(a0: f64, b0: f64) -> f64 {
    let (mut a, mut b) = (a0, b0);
    for _ in 0..AGM_MAX_ITER {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= 1e-16 * an {
            return an;
        }
        a = an;
        b = bn;
    }
    a
}

/// I1(x)/x for the modified Bessel function of order one.
///
/// The power series (x/2)^2k / (k! (k+1)!) has only positive terms, so the
/// sum carries no cancellation and stays accurate over the whole range of
/// arguments the taper synthesis produces. I1(x)/x -> 1/2 as x -> 0.
pub fn bessel_i1_over_x(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 0.5;
    let mut sum = term;
    for k in 1..500 {
        let k = k as f64;
        term *= q / (k * (k + 1.0));
        sum += term;
        if term < sum * f64::EPSILON {
            break;
        }
    }
    sum
}

// 15-point Gauss-Kronrod abscissae and weights on [-1, 1]; the embedded
// 7-point Gauss rule uses the odd-indexed nodes.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS_KRONROD: [f64; 8] = [
    0.022_935_322_010_529_2,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GK_WEIGHTS_GAUSS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod 15(7) panel; returns (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);

    let f_center = f(center);
    let mut kronrod = GK_WEIGHTS_KRONROD[7] * f_center;
    let mut gauss = GK_WEIGHTS_GAUSS[3] * f_center;
    for i in 0..7 {
        let dx = half * GK_NODES[i];
        let fsum = f(center - dx) + f(center + dx);
        kronrod += GK_WEIGHTS_KRONROD[i] * fsum;
        if i % 2 == 1 {
            gauss += GK_WEIGHTS_GAUSS[i / 2] * fsum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive quadrature of `f` over [a, b] to absolute tolerance `abs_tol`,
/// by bisection of Gauss-Kronrod panels whose error estimate exceeds their
/// length-proportional share of the budget.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let span = (b - a).abs();
    let mut total = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = gk15(f, lo, hi);
        if err <= abs_tol * (hi - lo).abs() / span || depth >= 50 {
            total += value;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // 50-digit reference values for K(m), m = k^2.
    #[test]
    fn elliptic_k_reference_values() {
        assert_relative_eq!(
            ellipk_modulus(0.1f64.sqrt()).unwrap(),
            1.6124413487202194,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            ellipk_modulus(0.5f64.sqrt()).unwrap(),
            1.8540746773013719,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            ellipk_modulus(0.9f64.sqrt()).unwrap(),
            2.5780921133481733,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            ellipk_modulus(0.99f64.sqrt()).unwrap(),
            3.6956373629898747,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            ellipk_modulus(0.0).unwrap(),
            std::f64::consts::FRAC_PI_2,
            max_relative = 1e-15
        );
    }

    #[test]
    fn elliptic_k_rejects_bad_modulus() {
        assert!(ellipk_modulus(1.0).is_err());
        assert!(ellipk_modulus(-0.1).is_err());
        assert!(ellipk_modulus(1.5).is_err());
    }

    #[test]
    fn elliptic_k_monotone_in_modulus() {
        let mut prev = ellipk_modulus(0.0).unwrap();
        for i in 1..100 {
            let k = i as f64 / 100.0;
            let cur = ellipk_modulus(k).unwrap();
            assert!(cur > prev, "K must increase with modulus (k = {k})");
            prev = cur;
        }
    }

    #[test]
    fn bessel_ratio_limits_and_values() {
        assert_relative_eq!(bessel_i1_over_x(0.0), 0.5, max_relative = 1e-15);
        // I1(1) = 0.5651591039924850, I1(5) = 24.33564214245053 (A&S tables)
        assert_relative_eq!(
            bessel_i1_over_x(1.0),
            0.565159103992485,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            bessel_i1_over_x(5.0),
            24.33564214245053 / 5.0,
            max_relative = 1e-13
        );
        // even function of x
        assert_relative_eq!(
            bessel_i1_over_x(-3.7),
            bessel_i1_over_x(3.7),
            max_relative = 1e-15
        );
    }

    #[test]
    fn quadrature_exact_smooth_integrals() {
        let exp = |x: f64| x.exp();
        assert_relative_eq!(
            integrate(&exp, 0.0, 1.0, 1e-12),
            std::f64::consts::E - 1.0,
            max_relative = 1e-13
        );
        let cos = |x: f64| x.cos();
        assert_relative_eq!(
            integrate(&cos, 0.0, std::f64::consts::FRAC_PI_2, 1e-12),
            1.0,
            max_relative = 1e-13
        );
        // orientation and the empty interval
        assert_relative_eq!(
            integrate(&exp, 1.0, 0.0, 1e-12),
            1.0 - std::f64::consts::E,
            max_relative = 1e-13
        );
        assert_eq!(integrate(&exp, 2.0, 2.0, 1e-12), 0.0);
    }

    #[test]
    fn quadrature_handles_peaked_integrand() {
        // integral of 1/(1 + (10x)^2) over [-1, 1] = atan(10)/5
        let f = |x: f64| 1.0 / (1.0 + 100.0 * x * x);
        assert_relative_eq!(
            integrate(&f, -1.0, 1.0, 1e-12),
            10.0f64.atan() / 5.0,
            max_relative = 1e-11
        );
    }

    #[test]
    fn kronrod_weights_normalized() {
        let wk: f64 = GK_WEIGHTS_KRONROD[..7].iter().sum::<f64>() * 2.0 + GK_WEIGHTS_KRONROD[7];
        let wg: f64 = GK_WEIGHTS_GAUSS[..3].iter().sum::<f64>() * 2.0 + GK_WEIGHTS_GAUSS[3];
        assert_relative_eq!(wk, 2.0, max_relative = 1e-14);
        assert_relative_eq!(wg, 2.0, max_relative = 1e-14);
    }
}

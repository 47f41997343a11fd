//! Standard normal CDF and quantile.

use crate::scalar::Real;

pub fn std_normal_pdf<T: Real>(x: T) -> T {
    (-(x * x) * T::lit(0.5)).exp() / T::TAU().sqrt()
}

/// `Φ(x)`, accurate in both tails.
pub fn std_normal_cdf<T: Real>(x: T) -> T {
    T::lit(0.5) * (-x / T::SQRT_2()).erfc()
}

/// `1 - Φ(x)` without cancellation.
pub fn std_normal_sf<T: Real>(x: T) -> T {
    T::lit(0.5) * (x / T::SQRT_2()).erfc()
}

/// `Φ⁻¹(p)` by Acklam's rational approximation polished with one Halley step.
pub fn std_normal_quantile<T: Real>(p: T) -> T {
    if p <= T::zero() {
        return T::neg_infinity();
    }
    if p >= T::one() {
        return T::infinity();
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let pf = p.as_f64();
    let low = 0.02425;
    let x0 = if pf < low {
        let q = (-2.0 * pf.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if pf <= 1.0 - low {
        let q = pf - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - pf).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    let x = T::lit(x0);
    let e = std_normal_cdf(x) - p;
    let u = e * T::TAU().sqrt() * (x * x * T::lit(0.5)).exp();
    x - u / (T::one() + x * u * T::lit(0.5))
}

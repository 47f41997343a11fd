//! Globally adaptive Gauss–Kronrod (7/15) integration.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate falls below `max(abs_tol, rel_tol * |I|)`.

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];

// Gauss weights for the odd-indexed Kronrod nodes (7-point rule).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-8,
            rel_tol: 0.0,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        QuadOptions {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half_len * T::lit(x);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(w) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    let value = kronrod * half_len;
    let error = ((kronrod - gauss) * half_len).abs();
    Segment { a, b, value, error }
}

/// Integrates `f` over `[a, b]`.
///
/// A NaN anywhere in the integrand is reported as [`Error::NonFinite`] rather
/// than absorbed into the estimate.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    opts: QuadOptions,
) -> Result<QuadResult<T>> {
    if a == b {
        return Ok(QuadResult {
            value: T::zero(),
            error: T::zero(),
            intervals: 0,
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("integration bounds"));
    }
    let (lo, hi, sign) = if a < b {
        (a, b, T::one())
    } else {
        (b, a, -T::one())
    };
    let r = refine(&f, vec![gk15(&f, lo, hi)], opts)?;
    Ok(QuadResult {
        value: sign * r.value,
        ..r
    })
}

fn refine<T: Real, F: Fn(T) -> T>(
    f: &F,
    mut segments: Vec<Segment<T>>,
    opts: QuadOptions,
) -> Result<QuadResult<T>> {
    let abs_tol = T::lit(opts.abs_tol.max(T::TOL_FLOOR));
    let rel_tol = T::lit(opts.rel_tol);
    let mut total: T = segments.iter().map(|s| s.value).sum();
    let mut err: T = segments.iter().map(|s| s.error).sum();
    loop {
        if !(total.is_finite() && err.is_finite()) {
            return Err(Error::NonFinite("quadrature integrand"));
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            // re-sum to shed the drift of the running totals
            let value = segments.iter().map(|s| s.value).sum();
            let error = segments.iter().map(|s| s.error).sum();
            return Ok(QuadResult {
                value,
                error,
                intervals: segments.len(),
            });
        }
        if segments.len() >= opts.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                error: err.as_f64(),
                intervals: segments.len(),
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |acc, (i, s)| {
                if s.error > acc.1 {
                    (i, s.error)
                } else {
                    acc
                }
            });
        let seg = segments.swap_remove(worst);
        let mid = T::lit(0.5) * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval collapsed to machine precision
            return Err(Error::QuadratureNonConvergence {
                error: err.as_f64(),
                intervals: segments.len() + 1,
            });
        }
        let left = gk15(f, seg.a, mid);
        let right = gk15(f, mid, seg.b);
        total = total - seg.value + left.value + right.value;
        err = (err - seg.error + left.error + right.error).max(T::zero());
        segments.push(left);
        segments.push(right);
    }
}

/// Integrates `f` over the span of `breaks`, seeding the adaptive scheme with
/// one segment per consecutive pair.
///
/// Sharp features narrower than the whole range (a concentrated density next
/// to a diffuse one) are otherwise invisible to the first 15-point rule.
pub fn integrate_with_breaks<T: Real, F: Fn(T) -> T>(
    f: F,
    breaks: &[T],
    opts: QuadOptions,
) -> Result<QuadResult<T>> {
    let mut pts: Vec<T> = breaks.iter().copied().filter(|x| x.is_finite()).collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() < 2 {
        return Err(Error::param(
            "breaks",
            "need at least two distinct finite points",
        ));
    }
    let segments: Vec<Segment<T>> = pts.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    refine(&f, segments, opts)
}

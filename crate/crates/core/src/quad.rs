//! Quadrature support: composite Simpson rules, an adaptive Gauss-Kronrod
//! integrator for smooth and semi-infinite integrands, and the scaled
//! complementary error function used by the Gaussian closed forms.

// QUADPACK nodes and frozen reference values
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Scaled complementary error function, `erfcx(x) = exp(x^2) erfc(x)`.
///
/// Stable for large positive arguments where `erfc` underflows. For
/// `x <= -26.6` the result overflows and +inf is returned.
pub fn erfcx(x: f64) -> f64 {
    if x >= 25.0 {
        // asymptotic series, truncation below 1e-13 for x >= 25
        let q = 0.5 / (x * x);
        let series = 1.0 + q * (-1.0 + q * (3.0 + q * (-15.0 + q * (105.0 - 945.0 * q))));
        series / (x * SQRT_PI)
    } else if x >= 0.0 {
        (x * x).exp() * libm::erfc(x)
    } else {
        // erfcx(-x) = 2 exp(x^2) - erfcx(x)
        2.0 * (x * x).exp() - erfcx(-x)
    }
}

/// Composite Simpson weights (1, 4, 2, ..., 2, 4, 1); caller applies `h / 3`.
pub fn simpson_weights(n: usize) -> Vec<f64> {
    assert!(n >= 3 && n % 2 == 1, "Simpson rule needs an odd point count >= 3");
    let mut w = vec![2.0; n];
    w[0] = 1.0;
    w[n - 1] = 1.0;
    for v in w.iter_mut().skip(1).step_by(2) {
        *v = 4.0;
    }
    w
}

/// Composite Simpson integral of uniformly sampled values with spacing `h`.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    assert!(n >= 3 && n % 2 == 1, "Simpson rule needs an odd point count >= 3");
    let mut acc = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

/// Simpson integral together with a Richardson error estimate obtained from
/// the stride-2 subgrid. Requires `len % 4 == 1` so both grids are valid.
pub fn simpson_with_estimate(values: &[f64], h: f64) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 5 || n % 4 != 1 {
        return Err(Error::InvalidGrid(format!(
            "convergence check needs n = 1 (mod 4) points, got {n}"
        )));
    }
    let fine = simpson(values, h);
    let coarse_vals: Vec<f64> = values.iter().step_by(2).copied().collect();
    let coarse = simpson(&coarse_vals, 2.0 * h);
    Ok((fine, (fine - coarse).abs() / 15.0))
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub segments: usize,
}

// 15-point Kronrod abscissae and weights with the embedded 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
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

fn qk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = 0.0;
    for j in 0..7 {
        let x = half * XGK[j];
        let fsum = f(center - x) + f(center + x);
        kronrod += WGK[j] * fsum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * fsum;
        }
    }
    gauss += WG[3] * fc;
    // |K - G| as a conservative error estimate
    let err = ((kronrod - gauss) * half).abs();
    (kronrod * half, err)
}

/// Adaptive Gauss-Kronrod integration of `f` on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite { name: "integration bound", value: if a.is_finite() { b } else { a } });
    }
    // seed with a uniform split so narrow displaced features are seen
    const INITIAL_SEGMENTS: usize = 8;
    let mut segs: Vec<(f64, f64, f64, f64)> = Vec::with_capacity(INITIAL_SEGMENTS);
    let step = (b - a) / INITIAL_SEGMENTS as f64;
    for i in 0..INITIAL_SEGMENTS {
        let sa = a + step * i as f64;
        let sb = if i + 1 == INITIAL_SEGMENTS { b } else { a + step * (i + 1) as f64 };
        let (v, e) = qk15(&f, sa, sb);
        segs.push((sa, sb, v, e));
    }
    const MAX_SEGMENTS: usize = 4096;
    loop {
        let total: f64 = segs.iter().map(|s| s.2).sum();
        let err: f64 = segs.iter().map(|s| s.3).sum();
        let tol = abs_tol.max(rel_tol * total.abs());
        if err <= tol {
            return Ok(QuadResult { value: total, abs_error: err, segments: segs.len() });
        }
        if segs.len() >= MAX_SEGMENTS {
            return Err(Error::Convergence { context: "adaptive quadrature", achieved: err, required: tol });
        }
        let (worst, _) = segs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty segment list");
        let (sa, sb, _, _) = segs.swap_remove(worst);
        let mid = 0.5 * (sa + sb);
        let (v1, e1) = qk15(&f, sa, mid);
        let (v2, e2) = qk15(&f, mid, sb);
        segs.push((sa, mid, v1, e1));
        segs.push((mid, sb, v2, e2));
    }
}

/// Adaptive integration of `f` over `[a, +inf)` via the map `x = a + t/(1-t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<QuadResult> {
    integrate(
        move |t| {
            let u = 1.0 - t;
            f(a + t / u) / (u * u)
        },
        0.0,
        1.0 - 1e-14,
        rel_tol,
        abs_tol,
    )
}

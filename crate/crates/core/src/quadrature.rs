//! Globally adaptive Gauss–Kronrod (7/15) integration on finite intervals.

#![allow(clippy::excessive_precision)]

use alloc::vec::Vec;


use crate::error::{Error, Result};

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

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Segment {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[lo, hi]` until the summed error estimate drops
/// below `tolerance` (absolute).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tolerance: f64) -> Result<f64> {
    if hi == lo {
        return Ok(0.0);
    }
    if hi < lo {
        return integrate(f, hi, lo, tolerance).map(|v| -v);
    }
    let mut segments: Vec<Segment> = Vec::with_capacity(64);
    segments.push(kronrod(&mut f, lo, hi));
    loop {
        let total_error: f64 = segments.iter().map(|s| s.error).sum();
        if !total_error.is_finite() {
            return Err(Error::IntegrationFailed {
                tolerance,
                estimate: total_error,
            });
        }
        if total_error <= tolerance {
            return Ok(segments.iter().map(|s| s.value).sum());
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, s)| {
                if s.error > best.1 {
                    (i, s.error)
                } else {
                    best
                }
            });
        let seg = segments[worst];
        let mid = 0.5 * (seg.lo + seg.hi);
        if segments.len() >= MAX_INTERVALS || mid <= seg.lo || mid >= seg.hi {
            return Err(Error::IntegrationFailed {
                tolerance,
                estimate: total_error,
            });
        }
        segments[worst] = kronrod(&mut f, seg.lo, mid);
        segments.push(kronrod(&mut f, mid, seg.hi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| 3.0 * x * x + 2.0 * x + 1.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((v - 14.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate(|x: f64| x.sin(), PI, 0.0, 1e-12).unwrap();
        assert!((v + 2.0).abs() < 1e-12);
    }

    #[test]
    fn handles_square_root_endpoint() {
        // ∫_0^1 sqrt(1 - x^2) dx = π/4.
        let v = integrate(|x: f64| (1.0 - x * x).max(0.0).sqrt(), 0.0, 1.0, 1e-11).unwrap();
        assert!((v - PI / 4.0).abs() < 1e-10);
    }

    #[test]
    fn reports_failure_on_non_integrable_spike() {
        let r = integrate(|x: f64| 1.0 / x.abs(), -1.0, 1.0, 1e-10);
        assert!(matches!(r, Err(Error::IntegrationFailed { .. })));
    }
}

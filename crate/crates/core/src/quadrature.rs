//! Adaptive Gauss–Kronrod (7/15) integration on finite intervals.

#![allow(clippy::excessive_precision)]

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

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct Settings {
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            abs_tol: 1e-14,
            max_intervals: 4096,
        }
    }
}

/// One 15-point Kronrod estimate with the embedded 7-point Gauss difference.
fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kron += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kron * half, ((kron - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]`, bisecting the worst subinterval until the
/// summed error estimate falls below `settings.abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, settings: Settings) -> Result<Integral> {
    let mut intervals = vec![{
        let (v, e) = kronrod15(&f, a, b);
        (a, b, v, e)
    }];
    let mut evaluations = 15;
    loop {
        let total_err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if total_err <= settings.abs_tol {
            break;
        }
        if intervals.len() >= settings.max_intervals {
            return Err(Error::QuadratureDiverged {
                estimate: total_err,
                evaluations,
            });
        }
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty");
        let (lo, hi, _, _) = intervals.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (vl, el) = kronrod15(&f, lo, mid);
        let (vr, er) = kronrod15(&f, mid, hi);
        evaluations += 30;
        intervals.push((lo, mid, vl, el));
        intervals.push((mid, hi, vr, er));
    }
    // sum small-to-large for stability
    let mut parts: Vec<(f64, f64)> = intervals.iter().map(|iv| (iv.2, iv.3)).collect();
    parts.sort_by(|x, y| x.0.abs().total_cmp(&y.0.abs()));
    Ok(Integral {
        value: parts.iter().map(|p| p.0).sum(),
        error: parts.iter().map(|p| p.1).sum(),
        evaluations,
    })
}

/// Integrates piecewise over consecutive `breakpoints`, which must be sorted.
/// Each piece receives a share of the tolerance proportional to its length.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    settings: Settings,
) -> Result<Integral> {
    let span = breakpoints.last().copied().unwrap_or(0.0) - breakpoints.first().copied().unwrap_or(0.0);
    let mut total = Integral {
        value: 0.0,
        error: 0.0,
        evaluations: 0,
    };
    for w in breakpoints.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let piece = Settings {
            abs_tol: settings.abs_tol * (w[1] - w[0]) / span,
            ..settings
        };
        let part = integrate(&f, w[0], w[1], piece)?;
        total.value += part.value;
        total.error += part.error;
        total.evaluations += part.evaluations;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| x.powi(6) - 3.0 * x, 0.0, 2.0, Settings::default()).unwrap();
        assert!((r.value - (128.0 / 7.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn sine_powers() {
        // ∫₀^π sin⁴ = 3π/8, ∫₀^π sin⁵ = 16/15
        let s4 = integrate(|x| x.sin().powi(4), 0.0, PI, Settings::default()).unwrap();
        let s5 = integrate(|x| x.sin().powi(5), 0.0, PI, Settings::default()).unwrap();
        assert!((s4.value - 3.0 * PI / 8.0).abs() < 1e-12);
        assert!((s5.value - 16.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn kink_handled_with_breakpoints() {
        let r = integrate_piecewise(|x: f64| x.cos().abs(), &[0.0, PI / 2.0, PI], Settings::default())
            .unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn reports_non_convergence() {
        let tight = Settings {
            abs_tol: 1e-30,
            max_intervals: 8,
        };
        match integrate(|x: f64| x.sqrt(), 0.0, 1.0, tight) {
            Err(Error::QuadratureDiverged { estimate, .. }) => assert!(estimate > 0.0),
            other => panic!("expected divergence, got {other:?}"),
        }
    }
}

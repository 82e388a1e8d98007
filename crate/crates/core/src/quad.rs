//! Adaptive Gauss-Kronrod (7/15) quadrature, with a variant for integrands
//! carrying algebraic singularities at the interval ends.

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
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 4000;

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol` by bisecting the
/// panel with the largest error estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    while err > tol {
        if panels.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature { tol, estimate: err });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (lo, hi, pv, pe) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (lv, le) = gk15(&f, lo, mid);
        let (rv, re) = gk15(&f, mid, hi);
        total += lv + rv - pv;
        err += le + re - pe;
        panels.push((lo, mid, lv, le));
        panels.push((mid, hi, rv, re));
        if !total.is_finite() {
            return Err(Error::Quadrature {
                tol,
                estimate: f64::INFINITY,
            });
        }
    }
    // re-sum to drop the drift of the running total
    Ok(panels.iter().map(|p| p.2).sum())
}

/// Evaluation point handed to [`integrate_singular_ends`]: the abscissa plus
/// its distances to both ends, computed without cancellation.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub x: f64,
    pub from_left: f64,
    pub from_right: f64,
}

/// Integrates `f` over `[a, b]` where `f` may behave like `(x-a)^left_exp`
/// near `a` and `(b-x)^right_exp` near `b`, with exponents `> -1`.
///
/// Each half interval is mapped by `x = end + d * u^p`, `p = 1/(1+exp)`, which
/// makes the transformed integrand bounded.
pub fn integrate_singular_ends<F: Fn(Point) -> f64>(
    f: F,
    a: f64,
    b: f64,
    left_exp: f64,
    right_exp: f64,
    tol: f64,
) -> Result<f64> {
    for (name, e) in [("left_exp", left_exp), ("right_exp", right_exp)] {
        if !(e > -1.0) {
            return Err(Error::Domain {
                param: name,
                value: e,
                reason: "endpoint singularity must be integrable",
            });
        }
    }
    let width = b - a;
    let half = 0.5 * width;
    let p_left = 1.0 / (1.0 + left_exp.min(0.0));
    let p_right = 1.0 / (1.0 + right_exp.min(0.0));
    let left = integrate(
        |u: f64| {
            let d = half * u.powf(p_left);
            let jac = half * p_left * u.powf(p_left - 1.0);
            jac * f(Point {
                x: a + d,
                from_left: d,
                from_right: width - d,
            })
        },
        0.0,
        1.0,
        0.5 * tol,
    )?;
    let right = integrate(
        |u: f64| {
            let d = half * u.powf(p_right);
            let jac = half * p_right * u.powf(p_right - 1.0);
            jac * f(Point {
                x: b - d,
                from_left: width - d,
                from_right: d,
            })
        },
        0.0,
        1.0,
        0.5 * tol,
    )?;
    Ok(left + right)
}

//! Numerical building blocks: adaptive Gauss-Kronrod quadrature, golden-section
//! search and a few special functions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Kronrod abscissae on `[0, 1]` (the rule is symmetric).
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
    0.209_482_141_084_727_8,
];
/// Gauss weights for the odd Kronrod nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        QuadSettings {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOutcome {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadFailure {
    /// Subdivision budget exhausted before the error estimate met tolerance.
    NotConverged { value: f64, error: f64 },
    /// The integrand produced a non-finite value or the sum overflowed.
    NonFinite,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive 7/15-point Gauss-Kronrod integration of `f` over the
/// finite interval `[a, b]`. The segment with the largest error estimate is
/// bisected until `error <= max(abs_tol, rel_tol * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    settings: &QuadSettings,
) -> Result<QuadOutcome, QuadFailure> {
    integrate_with_breaks(f, &[a, b], settings)
}

/// [`integrate`] starting from the segments between consecutive `breaks`
/// (ascending, at least two). Seeding with a scan keeps narrow peaks from
/// being missed by the first rule application.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    settings: &QuadSettings,
) -> Result<QuadOutcome, QuadFailure> {
    assert!(breaks.len() >= 2, "need at least one segment");
    let mut heap = BinaryHeap::new();
    let (mut value, mut error) = (0.0, 0.0);
    for w in breaks.windows(2) {
        if !(w[0] < w[1]) {
            continue;
        }
        let (v, e) = gk15(&f, w[0], w[1]);
        if !v.is_finite() || !e.is_finite() {
            return Err(QuadFailure::NonFinite);
        }
        value += v;
        error += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, error: e });
    }
    let mut total = value;
    let mut total_err = error;
    loop {
        if total_err <= settings.abs_tol.max(settings.rel_tol * total.abs()) {
            return Ok(QuadOutcome {
                value: total,
                error: total_err,
                intervals: heap.len(),
            });
        }
        if heap.len() >= settings.max_intervals {
            return Err(QuadFailure::NotConverged {
                value: total,
                error: total_err,
            });
        }
        let Some(worst) = heap.pop() else {
            return Ok(QuadOutcome { value: 0.0, error: 0.0, intervals: 0 });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval cannot be split further in floating point.
            return Err(QuadFailure::NotConverged {
                value: total,
                error: total_err,
            });
        }
        let (lv, le) = gk15(&f, worst.a, mid);
        let (rv, re) = gk15(&f, mid, worst.b);
        if !(lv.is_finite() && rv.is_finite() && le.is_finite() && re.is_finite()) {
            return Err(QuadFailure::NonFinite);
        }
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: lv, error: le });
        heap.push(Segment { a: mid, b: worst.b, value: rv, error: re });
        // Re-sum occasionally to keep cancellation drift out of the stopping test.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for a maximum of `f` on `[a, b]`, stopping when the
/// bracket is narrower than `tol`. Returns `(x_max, f_max)`; the endpoints are
/// not evaluated.
pub fn golden_section_maximize<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while (b - a) > tol && iters < 200 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iters += 1;
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `count` points from `lo` to `hi` (inclusive) with constant ratio.
pub fn geometric_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && count >= 2);
    let ratio = (hi / lo).ln();
    let last = (count - 1) as f64;
    let mut pts: Vec<f64> = (0..count)
        .map(|i| lo * (ratio * i as f64 / last).exp())
        .collect();
    pts[0] = lo;
    pts[count - 1] = hi;
    pts
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_points(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let step = (hi - lo) / (count - 1) as f64;
    let mut pts: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
    pts[count - 1] = hi;
    pts
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_exactly() {
        let out = integrate(|x| x * x, 0.0, 1.0, &QuadSettings::default()).unwrap();
        assert!((out.value - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_gaussian_density_over_wide_interval() {
        let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let out = integrate(phi, -40.0, 40.0, &QuadSettings::default()).unwrap();
        assert!((out.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reports_non_convergence_for_singular_integrand() {
        let settings = QuadSettings {
            max_intervals: 200,
            ..QuadSettings::default()
        };
        let r = integrate(|x: f64| 1.0 / x, 1e-300, 1.0, &settings);
        assert!(r.is_err());
    }

    #[test]
    fn golden_section_finds_interior_max() {
        let (x, fx) = golden_section_maximize(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-8);
        assert!(fx.abs() < 1e-15);
    }

    #[test]
    fn geometric_points_hit_endpoints() {
        let pts = geometric_points(1.0, 200.0, 512);
        assert_eq!(pts[0], 1.0);
        assert_eq!(pts[511], 200.0);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }
}

//! One-dimensional numerical building blocks: adaptive Gauss-Kronrod
//! integration, bounded scalar maximization and bracketed root finding.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// Kronrod nodes (positive half, descending, centre last) and weights for the
// 15-point rule; the embedded 7-point Gauss rule uses the odd-indexed nodes.
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
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0 && max_subdivisions > 0) {
            return Err(Error::InvalidData("quadrature tolerances must be positive".into()));
        }
        Ok(QuadratureSpec {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
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

/// Adaptive integration of `f` over the finite interval `[a, b]`, optionally
/// pre-split at `breaks` (points outside the interval are ignored).
pub fn integrate<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral> {
    let r = integrate_best(f, a, b, breaks, spec)?;
    if r.error > spec.abs_tol.max(spec.rel_tol * r.value.abs()) {
        return Err(Error::NumericalFailure(format!(
            "quadrature did not converge: estimate {:e}, error {:e}",
            r.value, r.error
        )));
    }
    Ok(r)
}

/// Like [`integrate`], but returns the best estimate with its error bound
/// when the subdivision budget runs out instead of failing.
pub fn integrate_best<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    spec: &QuadratureSpec,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NumericalFailure("non-finite integration bounds".into()));
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut points = vec![lo];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi).collect();
    inner.sort_by(f64::total_cmp);
    points.extend(inner);
    points.push(hi);

    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1]);
        total += v;
        total_err += e;
        heap.push(Segment {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let mut splits = 0;
    loop {
        if !total.is_finite() {
            return Err(Error::NumericalFailure("integrand produced a non-finite value".into()));
        }
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            break;
        }
        if splits >= spec.max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval can no longer be bisected in floating point.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        splits += 1;
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Integral {
        value: sign * value,
        error,
    })
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Maximizes a unimodal-ish function on `[lo, hi]` by golden-section search.
/// Returns `(argmax, max)`. The endpoints are evaluated as well, so the result
/// is never worse than the better endpoint.
pub fn maximize_golden<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

/// Root of a monotone function on a sign-changing bracket by safeguarded
/// bisection/secant (Illinois variant).
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, x_tol: f64, max_iter: usize) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NumericalFailure("root is not bracketed".into()));
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        let mut x = (a * fb - b * fa) / (fb - fa);
        // Fall back to bisection when the secant step leaves the bracket.
        if !(x > a.min(b) && x < a.max(b)) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if fx == 0.0 || (b - a).abs() < x_tol {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = x;
            fa = fx;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < x_tol {
            return Ok(0.5 * (a + b));
        }
    }
    Err(Error::MaxIterations(max_iter))
}

/// Neumaier-compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_rule_is_exact_for_high_degree_polynomials() {
        for deg in 0..=22 {
            let (v, _) = gk15(&mut |x: f64| x.powi(deg), 0.0, 1.0);
            assert!((v - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "degree {deg}");
        }
    }

    #[test]
    fn adaptive_handles_peaks_and_breaks() {
        let spec = QuadratureSpec::default();
        let r = integrate(|x: f64| (-(x * x) * 1e4).exp(), -1.0, 1.0, &[0.0], &spec).unwrap();
        assert!((r.value - (std::f64::consts::PI / 1e4).sqrt()).abs() < 1e-10);
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &[], &spec).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-9);
        let r = integrate(|x: f64| x, 1.0, 0.0, &[], &spec).unwrap();
        assert!((r.value + 0.5).abs() < 1e-15);
    }

    #[test]
    fn integrate_reports_failure() {
        let spec = QuadratureSpec::new(1e-14, 1e-14, 3).unwrap();
        assert!(integrate(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &[], &spec).is_err());
    }

    #[test]
    fn golden_and_root() {
        let (x, fx) = maximize_golden(|x| -(x - 0.3) * (x - 0.3), -1.0, 2.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8 && fx.abs() < 1e-15);
        let (x, _) = maximize_golden(|x| x, 0.0, 1.0, 1e-6);
        assert_eq!(x, 1.0);
        let r = find_root(|x| x.powi(3) - 2.0, 0.0, 5.0, 1e-13, 200).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-12);
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 10).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        for x in [1e16, 1.0, -1e16, 1.0] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }
}

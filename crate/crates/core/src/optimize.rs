//! Bounded maximisation used by the likelihood fitting and the power-law fit.

/// Inverse golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a bounded scalar maximisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub arg: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of `f` on `[lo, hi]`.
///
/// The endpoints are evaluated as well, so maxima sitting on a bound (a very
/// common case for exponents that collapse to zero) are found exactly.
/// `-inf` is a legal value of `f`; `NaN` is treated as `-inf`.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    assert!(lo <= hi, "empty interval [{lo}, {hi}]");
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let mut best = Maximum { arg: lo, value: eval(lo) };
    let at_hi = eval(hi);
    if at_hi > best.value {
        best = Maximum { arg: hi, value: at_hi };
    }
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    let mid = 0.5 * (a + b);
    for (x, v) in [(c, fc), (d, fd), (mid, eval(mid))] {
        if v > best.value {
            best = Maximum { arg: x, value: v };
        }
    }
    best
}

/// Coordinate ascent over box-constrained parameters, one golden-section line
/// search per coordinate and sweep.
///
/// Stops after `max_sweeps` sweeps or once a sweep improves the objective by
/// less than `tol`.
pub fn coordinate_ascent<F>(
    mut f: F,
    start: &[f64],
    bounds: &[(f64, f64)],
    tol: f64,
    max_sweeps: usize,
) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(start.len(), bounds.len());
    let mut x = start.to_vec();
    let mut value = f(&x);
    if value.is_nan() {
        value = f64::NEG_INFINITY;
    }
    for _ in 0..max_sweeps {
        let before = value;
        for i in 0..x.len() {
            let (lo, hi) = bounds[i];
            let mut probe = x.clone();
            let m = golden_section_max(
                |v| {
                    probe[i] = v;
                    f(&probe)
                },
                lo,
                hi,
                tol,
            );
            if m.value >= value {
                x[i] = m.arg;
                value = m.value;
            }
        }
        if value.is_finite() && before.is_finite() && value - before < tol {
            break;
        }
        if !value.is_finite() && !before.is_finite() && value == before {
            break;
        }
    }
    (x, value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_maximum() {
        let m = golden_section_max(|x| -(x - 2.5) * (x - 2.5), 0.0, 10.0, 1e-6);
        assert!((m.arg - 2.5).abs() < 1e-5);
    }

    #[test]
    fn boundary_maximum() {
        let m = golden_section_max(|x| -x, 0.0, 10.0, 1e-6);
        assert_eq!(m.arg, 0.0);
        let m = golden_section_max(|x| if x == 0.0 { 1.0 } else { f64::NEG_INFINITY }, 0.0, 10.0, 1e-6);
        assert_eq!(m.arg, 0.0);
        assert_eq!(m.value, 1.0);
    }

    #[test]
    fn coordinate_ascent_separable() {
        let (x, v) = coordinate_ascent(
            |p| -(p[0] - 1.0).powi(2) - (p[1] - 3.0).powi(2),
            &[5.0, 5.0],
            &[(0.0, 10.0), (0.0, 10.0)],
            1e-8,
            100,
        );
        assert!((x[0] - 1.0).abs() < 1e-4 && (x[1] - 3.0).abs() < 1e-4);
        assert!(v > -1e-8);
    }
}

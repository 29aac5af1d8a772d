//! Derivative-free maximization of a scalar function on an interval.
//!
//! A uniform grid locates the best sample; golden-section search then
//! refines inside the two neighbouring cells. Maxima on the interval
//! boundary are handled without special cases since the bracket is
//! simply clipped there.

/// `1 / phi`, the golden-section shrink factor.
const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section search for a maximum of a unimodal `f` on `[lo, hi]`.
/// Stops when the bracket is narrower than `tol`. The best point seen is
/// returned, with ties resolved toward the lower abscissa.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - INV_GOLDEN * (b - a);
    let mut d = a + INV_GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut evaluations = 2;
    let mut best = if fd > fc { (d, fd) } else { (c, fc) };

    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_GOLDEN * (b - a);
            fc = f(c);
            evaluations += 1;
            if fc > best.1 || (fc == best.1 && c < best.0) {
                best = (c, fc);
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_GOLDEN * (b - a);
            fd = f(d);
            evaluations += 1;
            if fd > best.1 {
                best = (d, fd);
            }
        }
    }

    Maximum {
        x: best.0,
        value: best.1,
        evaluations,
    }
}

/// Samples `f` on `cells + 1` evenly spaced points of `[lo, hi]`, then
/// refines around the best sample with golden-section search.
///
/// Exact ties among grid samples keep the lowest abscissa. The refined
/// point replaces the grid winner only when it is better by more than a
/// few ulps of the function value, so flat boundary maxima are not
/// nudged inward by rounding noise.
pub fn grid_then_golden<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, cells: usize, tol: f64) -> Maximum {
    let cells = cells.max(1);
    let step = (hi - lo) / cells as f64;
    let at = |k: usize| if k == cells { hi } else { lo + k as f64 * step };

    let (mut k_best, mut f_best) = (0, f(lo));
    for k in 1..=cells {
        let v = f(at(k));
        if v > f_best {
            k_best = k;
            f_best = v;
        }
    }

    let left = at(k_best.saturating_sub(1));
    let right = at((k_best + 1).min(cells));
    let refined = golden_section_max(&f, left, right, tol);
    let evaluations = cells + 1 + refined.evaluations;

    let grid_x = at(k_best);
    let noise = 4.0 * f64::EPSILON * f_best.abs();
    if refined.value > f_best + noise {
        Maximum {
            x: refined.x,
            value: refined.value,
            evaluations,
        }
    } else {
        Maximum {
            x: grid_x,
            value: f_best,
            evaluations,
        }
    }
}

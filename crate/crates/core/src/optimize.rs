//! One-dimensional search: grid scan with golden-section refinement, and
//! bisection for monotone roots.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub arg: f64,
    pub value: f64,
}

/// Maximum of `f` over `[lo, hi]`: uniform grid of `grid_points`, then a
/// golden-section search over the two grid cells around the best sample.
/// Never returns less than the best grid value.
pub fn maximize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid_points: usize, tol: f64) -> Extremum {
    let grid = grid_maximum(&f, lo, hi, grid_points);
    let n = grid_points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let k = ((grid.arg - lo) / step).round() as isize;
    let a = lo + step * (k - 1).max(0) as f64;
    let b = (lo + step * (k + 1).min(n as isize - 1) as f64).min(hi);
    let refined = golden_maximum(&f, a, b, tol);
    if refined.value > grid.value {
        refined
    } else {
        grid
    }
}

pub fn minimize<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid_points: usize, tol: f64) -> Extremum {
    let m = maximize(|x| -f(x), lo, hi, grid_points, tol);
    Extremum {
        arg: m.arg,
        value: -m.value,
    }
}

/// Best sample on a uniform grid (NaN samples are skipped).
pub fn grid_maximum<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, grid_points: usize) -> Extremum {
    let n = grid_points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = Extremum {
        arg: lo,
        value: f64::NEG_INFINITY,
    };
    for k in 0..n {
        let x = if k == n - 1 { hi } else { lo + step * k as f64 };
        let v = f(x);
        if v > best.value {
            best = Extremum { arg: x, value: v };
        }
    }
    best
}

/// Golden-section search for a maximum on `[a, b]` down to bracket width `tol`.
pub fn golden_maximum<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Extremum {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = Extremum { arg: a, value: f(a) };
    let fb = f(b);
    if fb > best.value {
        best = Extremum { arg: b, value: fb };
    }
    while (b - a).abs() > tol {
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
    for (x, v) in [(c, fc), (d, fd)] {
        if v > best.value {
            best = Extremum { arg: x, value: v };
        }
    }
    best
}

/// Root of a non-decreasing `g` on `[lo, hi]` with `g(lo) <= 0 <= g(hi)`.
/// Returns the final bracket `(lo, hi)`.
pub fn bisect_increasing<F: FnMut(f64) -> f64>(mut g: F, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> (f64, f64) {
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_maximum() {
        let m = maximize(|x| -(x - 0.3141).powi(2), 0.0, 1.0, 1025, 1e-10);
        assert!((m.arg - 0.3141).abs() < 1e-8);
        assert!(m.value.abs() < 1e-15);
    }

    #[test]
    fn finds_endpoint_maximum() {
        let m = maximize(|x| x, 0.0, 1.0, 17, 1e-10);
        assert_eq!(m.arg, 1.0);
        let m = minimize(|x| x, 0.0, 1.0, 17, 1e-10);
        assert_eq!(m.arg, 0.0);
    }

    #[test]
    fn bisection_brackets_root() {
        let (lo, hi) = bisect_increasing(|x| x * x * x - 2.0, 0.0, 2.0, 1e-14, 200);
        assert!(lo <= 2f64.cbrt() && 2f64.cbrt() <= hi);
        assert!(hi - lo <= 1e-14);
    }
}

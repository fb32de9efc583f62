//! Scalar maximisation on a bounded interval.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the maximiser of `f` on `[lo, hi]`, stopping
/// once the bracket is narrower than `tol`.
///
/// The bracket is first narrowed to the neighbourhood of the best point of
/// a `grid`-point scan, so a single spurious local maximum elsewhere on the
/// interval cannot capture the search.
pub fn golden_section_max<F>(f: F, lo: f64, hi: f64, tol: f64, grid: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    if grid >= 3 {
        let step = (hi - lo) / (grid - 1) as f64;
        let mut best = (0, f64::NEG_INFINITY);
        for i in 0..grid {
            let v = f(lo + step * i as f64);
            if v > best.1 {
                best = (i, v);
            }
        }
        a = lo + step * best.0.saturating_sub(1) as f64;
        b = (lo + step * (best.0 + 1) as f64).min(hi);
    }

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
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
    let mid = 0.5 * (a + b);
    // Endpoints of the original interval are candidates too.
    [mid, lo, hi]
        .into_iter()
        .map(|x| (x, f(x)))
        .fold((mid, f64::NEG_INFINITY), |acc, (x, v)| if v > acc.1 { (x, v) } else { acc })
        .0
}

//! One-dimensional infimum search over the exponent `q`.

/// Coarse grid size before golden-section refinement.
pub const GRID_POINTS: usize = 64;
/// Relative gap kept from an open right endpoint.
pub const RIGHT_GAP: f64 = 1e-6;

const GOLDEN_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub arg: f64,
    pub value: f64,
}

/// Minimizes `f` over `[lo, hi]` (`hi` pulled in by [`RIGHT_GAP`] when open).
///
/// `f` returns `None` where the objective is undefined; such points are
/// skipped. A 64-point grid locates the best bracket, golden-section search
/// refines it, and ties go to the smaller argument.
pub fn minimize<F>(lo: f64, hi: f64, hi_open: bool, mut f: F) -> Option<Minimum>
where
    F: FnMut(f64) -> Option<f64>,
{
    let hi = if hi_open { hi - RIGHT_GAP * hi.abs().max(1.0) } else { hi };
    if !(hi >= lo) {
        return None;
    }
    let n = GRID_POINTS;
    let grid: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let values: Vec<Option<f64>> = grid.iter().map(|&q| f(q).filter(|v| v.is_finite())).collect();

    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    let (i, v) = best?;
    let mut result = Minimum { arg: grid[i], value: v };

    let a = grid[i.saturating_sub(1)];
    let b = grid[(i + 1).min(n - 1)];
    if b > a {
        let mut g = |x: f64| f(x).filter(|v| v.is_finite()).unwrap_or(f64::INFINITY);
        let refined = golden_section(a, b, &mut g);
        if refined.value < result.value
            || (refined.value == result.value && refined.arg < result.arg)
        {
            result = refined;
        }
    }
    Some(result)
}

fn golden_section<F: FnMut(f64) -> f64>(mut a: f64, mut b: f64, f: &mut F) -> Minimum {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..GOLDEN_ITERS {
        if (b - a).abs() <= 1e-13 * b.abs().max(1.0) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        Minimum { arg: c, value: fc }
    } else {
        Minimum { arg: d, value: fd }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_minimum() {
        let m = minimize(0.0, 3.0, false, |x| Some((x - 1.234).powi(2) + 0.5)).unwrap();
        assert!((m.arg - 1.234).abs() < 1e-6);
        assert!((m.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn respects_open_right_endpoint() {
        let m = minimize(1.0, 2.0, true, |x| Some(-x)).unwrap();
        assert!(m.arg < 2.0);
        assert!(m.arg > 2.0 - 1e-5);
    }

    #[test]
    fn skips_undefined_points() {
        let m = minimize(0.0, 1.0, false, |x| if x < 0.5 { None } else { Some(1.0 / x) }).unwrap();
        assert!((m.arg - 1.0).abs() < 1e-12);
        assert!(minimize(0.0, 1.0, false, |_| None).is_none());
    }

    #[test]
    fn ties_go_to_smaller_argument() {
        let m = minimize(1.0, 2.0, false, |_| Some(3.0)).unwrap();
        assert_eq!(m.arg, 1.0);
    }
}

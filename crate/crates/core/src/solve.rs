//! Scalar root finding and one-dimensional minimization.
//!
//! Everything here assumes monotone or unimodal inputs, which the N-function
//! invariants guarantee for every call site in the crate.

use crate::error::{Error, Result};

/// Relative tolerance used by default for all bisections.
pub const BISECTION_RTOL: f64 = 1e-12;

const MAX_BISECTION_STEPS: usize = 2_000;
const MAX_BRACKET_DOUBLINGS: usize = 2_100;

/// Solves `f(x) = target` for a nondecreasing `f` on `[lo, hi]`.
///
/// The bracket must satisfy `f(lo) <= target <= f(hi)`. Iterates until the
/// bracket width falls under `rtol * |hi|` or the midpoint stops moving, then
/// returns whichever endpoint has the smaller residual.
pub fn bisect_increasing<F>(mut f: F, target: f64, mut lo: f64, mut hi: f64, rtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::numeric(format!("invalid bracket [{lo}, {hi}]")));
    }
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rtol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    // the last evaluated side closest to the target
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if (target - flo).abs() <= (fhi - target).abs() {
        Ok(lo)
    } else {
        Ok(hi)
    }
}

/// Grows `hi` by doubling from `start` until `f(hi) >= target`, never passing `cap`.
///
/// Returns `None` when even `f(cap) < target`.
pub fn grow_upper<F>(mut f: F, target: f64, start: f64, cap: f64) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut hi = start.max(f64::MIN_POSITIVE).min(cap);
    for _ in 0..MAX_BRACKET_DOUBLINGS {
        if f(hi)? >= target {
            return Ok(Some(hi));
        }
        if hi >= cap {
            return Ok(None);
        }
        hi = (2.0 * hi).min(cap);
    }
    Ok(None)
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
///
/// Returns `(argmin, min)`. Stops when the interval is below
/// `rtol * max(|x|, tiny)`.
pub fn golden_min<F>(mut f: F, mut a: f64, mut b: f64, rtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..500 {
        if (b - a).abs() <= rtol * (0.5 * (a.abs() + b.abs())).max(1e-300) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

/// Golden-section maximization; thin wrapper around [`golden_min`].
pub fn golden_max<F>(mut f: F, a: f64, b: f64, rtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (x, v) = golden_min(|x| f(x).map(|y| -y), a, b, rtol)?;
    Ok((x, -v))
}

/// Logarithmically spaced points between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(lo > 0.0 && hi > lo && n >= 2);
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_cube_root() {
        let x = bisect_increasing(|x| Ok(x * x * x), 27.0, 0.0, 10.0, 1e-12).unwrap();
        assert!((x - 3.0).abs() < 1e-12);
    }

    #[test]
    fn bisection_rejects_bad_bracket() {
        assert!(bisect_increasing(Ok, 1.0, 2.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn grow_upper_stops_at_cap() {
        let hi = grow_upper(Ok, 100.0, 1.0, 50.0).unwrap();
        assert_eq!(hi, None);
        let hi = grow_upper(Ok, 100.0, 1.0, 1e3).unwrap().unwrap();
        assert!((100.0..=128.0).contains(&hi));
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_min(|x| Ok((x - 1.3).powi(2) + 2.0), -5.0, 5.0, 1e-10).unwrap();
        // argmin resolution is limited to ~sqrt(eps) by the flat minimum
        assert!((x - 1.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(1e-3, 1e3, 7);
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1e-3).abs() < 1e-15);
        assert!((g[6] - 1e3).abs() < 1e-9);
        assert!((g[3] - 1.0).abs() < 1e-12);
    }
}

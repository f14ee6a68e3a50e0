//! Bracketed scalar root finding.

use crate::{Error, Result};

/// Relative tolerance floor, a few ulps.
const RTOL: f64 = 4.0 * f64::EPSILON;
const MAX_ITER: usize = 200;

/// Finds a root of `f` in `[a, b]` with Brent's method.
///
/// `f(a)` and `f(b)` must not have the same strict sign. Convergence is
/// guaranteed on such a bracket; each step falls back to bisection whenever the
/// inverse-quadratic or secant step would leave the shrinking bracket.
/// Iteration stops once the bracket is narrower than `xtol + 4 eps |x|`.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, what: &'static str) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut xpre = a;
    let mut xcur = b;
    let mut fpre = f(xpre);
    let mut fcur = f(xcur);
    if fpre.is_nan() || fcur.is_nan() {
        return Err(Error::NoBracket { what });
    }
    if fpre == 0.0 {
        return Ok(xpre);
    }
    if fcur == 0.0 {
        return Ok(xcur);
    }
    if fpre.is_sign_negative() == fcur.is_sign_negative() {
        return Err(Error::NoBracket { what });
    }

    let (mut xblk, mut fblk) = (0.0, 0.0);
    let (mut spre, mut scur) = (0.0, 0.0);
    for _ in 0..MAX_ITER {
        if fpre != 0.0 && fcur != 0.0 && fpre.is_sign_negative() != fcur.is_sign_negative() {
            xblk = xpre;
            fblk = fpre;
            spre = xcur - xpre;
            scur = spre;
        }
        if fblk.abs() < fcur.abs() {
            xpre = xcur;
            xcur = xblk;
            xblk = xpre;
            fpre = fcur;
            fcur = fblk;
            fblk = fpre;
        }

        let delta = 0.5 * (xtol + RTOL * xcur.abs());
        let sbis = 0.5 * (xblk - xcur);
        if fcur == 0.0 || sbis.abs() < delta {
            return Ok(xcur);
        }

        if spre.abs() > delta && fcur.abs() < fpre.abs() {
            let stry = if xpre == xblk {
                // secant
                -fcur * (xcur - xpre) / (fcur - fpre)
            } else {
                // inverse quadratic interpolation
                let dpre = (fpre - fcur) / (xpre - xcur);
                let dblk = (fblk - fcur) / (xblk - xcur);
                -fcur * (fblk * dblk - fpre * dpre) / (dblk * dpre * (fblk - fpre))
            };
            if 2.0 * stry.abs() < spre.abs().min(3.0 * sbis.abs() - delta) {
                spre = scur;
                scur = stry;
            } else {
                spre = sbis;
                scur = sbis;
            }
        } else {
            spre = sbis;
            scur = sbis;
        }

        xpre = xcur;
        fpre = fcur;
        if scur.abs() > delta {
            xcur += scur;
        } else {
            xcur += if sbis > 0.0 { delta } else { -delta };
        }
        fcur = f(xcur);
        if fcur.is_nan() {
            return Err(Error::NoConvergence {
                what,
                iterations: MAX_ITER,
            });
        }
    }
    Err(Error::NoConvergence {
        what,
        iterations: MAX_ITER,
    })
}

/// Returns the first adjacent pair of `points` over which `f` changes sign.
///
/// A point where `f` vanishes exactly is returned as a degenerate pair.
pub fn scan_sign_change<F>(mut f: F, points: &[f64]) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut iter = points.iter().copied();
    let mut x0 = iter.next()?;
    let mut f0 = f(x0);
    if f0 == 0.0 {
        return Some((x0, x0));
    }
    for x1 in iter {
        let f1 = f(x1);
        if f1 == 0.0 {
            return Some((x1, x1));
        }
        if f0.is_sign_negative() != f1.is_sign_negative() {
            return Some((x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    None
}

/// Finds the root of `f` nearest `seed` inside `[lo, hi]`.
///
/// The bracket `[seed - step, seed + step]` is doubled until it straddles a
/// sign change or covers `[lo, hi]`. Used for continuation along curves, where
/// the previous solution is a good guess for the next.
pub fn seeded_root<F>(
    mut f: F,
    seed: f64,
    step: f64,
    lo: f64,
    hi: f64,
    xtol: f64,
    what: &'static str,
) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let seed = seed.clamp(lo, hi);
    let fs = f(seed);
    if fs == 0.0 {
        return Ok(seed);
    }
    let mut width = step.max(xtol);
    loop {
        let a = (seed - width).max(lo);
        let b = (seed + width).min(hi);
        let fa = f(a);
        if fa.is_sign_negative() != fs.is_sign_negative() || fa == 0.0 {
            return brent(&mut f, a, seed, xtol, what);
        }
        let fb = f(b);
        if fb.is_sign_negative() != fs.is_sign_negative() || fb == 0.0 {
            return brent(&mut f, seed, b, xtol, what);
        }
        if a <= lo && b >= hi {
            return Err(Error::NoBracket { what });
        }
        width *= 2.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = brent(|x| x * x * x - 2.0 * x - 5.0, 2.0, 3.0, 1e-14, "x").unwrap();
        assert!((r - 2.094_551_481_542_326_5).abs() < 1e-13);
    }

    #[test]
    fn endpoint_root_is_returned() {
        assert_eq!(brent(|x| x - 1.0, 1.0, 2.0, 1e-12, "x").unwrap(), 1.0);
    }

    #[test]
    fn same_sign_is_rejected() {
        let e = brent(|x| x * x + 1.0, -1.0, 1.0, 1e-12, "x").unwrap_err();
        assert_eq!(e, Error::NoBracket { what: "x" });
    }

    #[test]
    fn discontinuous_sign_change_converges_to_jump() {
        let r = brent(|x| if x < 0.3 { -1.0 } else { 1.0 }, 0.0, 1.0, 1e-12, "x").unwrap();
        assert!((r - 0.3).abs() < 1e-11);
    }

    #[test]
    fn seeded_root_expands() {
        let r = seeded_root(|x| libm::tanh(x - 0.7), 0.0, 1e-3, -5.0, 5.0, 1e-14, "x").unwrap();
        assert!((r - 0.7).abs() < 1e-13);
    }

    #[test]
    fn scan_finds_first_change() {
        let pts = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(
            scan_sign_change(|x| (x - 1.5) * (x - 3.5), &pts),
            Some((1.0, 2.0))
        );
        assert_eq!(scan_sign_change(|x| x + 1.0, &pts), None);
    }
}

use alloc::vec;
use alloc::vec::Vec;

use super::Iwp;
use crate::roots::brent;
use crate::{Error, Result};

/// Distribution given by samples of its cumulative function.
///
/// Between knots the cdf is a monotone cubic Hermite interpolant. Knot slopes
/// come from the natural C² spline when that spline is increasing everywhere,
/// otherwise from the Fritsch-Butland formula, so the pdf is always continuous
/// and piecewise quadratic, and its derivative is continuous for smooth data.
/// Outside the table the cdf continues with exponential tails matched to the
/// end slopes, which keeps the support the whole real axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    cdfs: Vec<f64>,
    slopes: Vec<f64>,
    lower_rate: f64,
    upper_rate: f64,
}

impl Tabulated {
    /// Builds the interpolant from `(x, F(x))` pairs.
    ///
    /// Both columns must be strictly increasing and `F` must lie in `(0, 1)`.
    pub fn new(points: &[(f64, f64)]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InvalidTable("need at least three rows"));
        }
        if points
            .iter()
            .any(|&(x, c)| !x.is_finite() || !(c > 0.0 && c < 1.0))
        {
            return Err(Error::InvalidTable("F must lie strictly between 0 and 1"));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0 && w[1].1 > w[0].1)) {
            return Err(Error::InvalidTable("both columns must be strictly increasing"));
        }
        let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
        let cdfs: Vec<f64> = points.iter().map(|p| p.1).collect();
        let n = xs.len();
        let secant: Vec<f64> = (0..n - 1)
            .map(|i| (cdfs[i + 1] - cdfs[i]) / (xs[i + 1] - xs[i]))
            .collect();

        let spline = spline_slopes(&xs, &secant);
        let slopes = if is_increasing(&xs, &secant, &spline) {
            spline
        } else {
            butland_slopes(&xs, &secant)
        };

        let lower_rate = slopes[0] / cdfs[0];
        let upper_rate = slopes[n - 1] / (1.0 - cdfs[n - 1]);
        Ok(Tabulated {
            xs,
            cdfs,
            slopes,
            lower_rate,
            upper_rate,
        })
    }

    /// Knot abscissas.
    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    fn last(&self) -> usize {
        self.xs.len() - 1
    }

    // Polynomial coefficients of the cubic on segment i, in powers of (x - x_i).
    fn cubic(&self, i: usize) -> [f64; 4] {
        let h = self.xs[i + 1] - self.xs[i];
        let delta = (self.cdfs[i + 1] - self.cdfs[i]) / h;
        let (m0, m1) = (self.slopes[i], self.slopes[i + 1]);
        [
            self.cdfs[i],
            m0,
            (3.0 * delta - 2.0 * m0 - m1) / h,
            (m0 + m1 - 2.0 * delta) / (h * h),
        ]
    }

    fn segment(&self, x: f64) -> usize {
        let k = self.xs.partition_point(|&k| k <= x);
        k.saturating_sub(1).min(self.last() - 1)
    }

    /// `(F, f, f', f'')` at `x`.
    fn jet(&self, x: f64) -> [f64; 4] {
        let n = self.last();
        if x < self.xs[0] {
            let c = self.cdfs[0] * libm::exp(self.lower_rate * (x - self.xs[0]));
            let r = self.lower_rate;
            return [c, r * c, r * r * c, r * r * r * c];
        }
        if x > self.xs[n] {
            let s = (1.0 - self.cdfs[n]) * libm::exp(-self.upper_rate * (x - self.xs[n]));
            let r = self.upper_rate;
            return [1.0 - s, r * s, -r * r * s, r * r * r * s];
        }
        let i = self.segment(x);
        let [c0, c1, c2, c3] = self.cubic(i);
        let s = x - self.xs[i];
        [
            c0 + s * (c1 + s * (c2 + s * c3)),
            c1 + s * (2.0 * c2 + 3.0 * s * c3),
            2.0 * c2 + 6.0 * c3 * s,
            6.0 * c3,
        ]
    }
}

fn butland_slopes(xs: &[f64], secant: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut slopes = Vec::with_capacity(n);
    slopes.push(secant[0]);
    for i in 1..n - 1 {
        let (h0, h1) = (xs[i] - xs[i - 1], xs[i + 1] - xs[i]);
        let (d0, d1) = (secant[i - 1], secant[i]);
        slopes.push(3.0 * (h0 + h1) / ((2.0 * h1 + h0) / d0 + (h1 + 2.0 * h0) / d1));
    }
    slopes.push(secant[n - 2]);
    slopes
}

// Natural cubic spline slopes by the Thomas algorithm.
fn spline_slopes(xs: &[f64], secant: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diag[0] = 2.0;
    sup[0] = 1.0;
    rhs[0] = 3.0 * secant[0];
    for i in 1..n - 1 {
        sub[i] = h[i];
        diag[i] = 2.0 * (h[i - 1] + h[i]);
        sup[i] = h[i - 1];
        rhs[i] = 3.0 * (h[i] * secant[i - 1] + h[i - 1] * secant[i]);
    }
    sub[n - 1] = 1.0;
    diag[n - 1] = 2.0;
    rhs[n - 1] = 3.0 * secant[n - 2];
    for i in 1..n {
        let w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    let mut m = vec![0.0; n];
    m[n - 1] = rhs[n - 1] / diag[n - 1];
    for i in (0..n - 1).rev() {
        m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
    }
    m
}

// The Hermite pdf on a segment is a quadratic; check its minimum.
fn is_increasing(xs: &[f64], secant: &[f64], slopes: &[f64]) -> bool {
    (0..xs.len() - 1).all(|i| {
        let h = xs[i + 1] - xs[i];
        let (m0, m1, d) = (slopes[i], slopes[i + 1], secant[i]);
        let c2 = (3.0 * d - 2.0 * m0 - m1) / h;
        let c3 = (m0 + m1 - 2.0 * d) / (h * h);
        let pdf = |s: f64| m0 + s * (2.0 * c2 + 3.0 * c3 * s);
        let mut lowest = m0.min(m1);
        if c3 != 0.0 {
            let s = -c2 / (3.0 * c3);
            if s > 0.0 && s < h {
                lowest = lowest.min(pdf(s));
            }
        }
        lowest > 0.0
    })
}

impl Iwp for Tabulated {
    fn pdf(&self, x: f64) -> f64 {
        self.jet(x)[1]
    }

    fn pdf_prime(&self, x: f64) -> f64 {
        self.jet(x)[2]
    }

    fn pdf_second(&self, x: f64) -> f64 {
        self.jet(x)[3]
    }

    fn cdf(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }

    fn sf(&self, x: f64) -> f64 {
        let n = self.last();
        if x > self.xs[n] {
            (1.0 - self.cdfs[n]) * libm::exp(-self.upper_rate * (x - self.xs[n]))
        } else {
            1.0 - self.cdf(x)
        }
    }

    fn quantile(&self, q: f64) -> f64 {
        let n = self.last();
        if q <= self.cdfs[0] {
            return self.xs[0] + libm::log(q / self.cdfs[0]) / self.lower_rate;
        }
        if q >= self.cdfs[n] {
            return self.xs[n] - libm::log((1.0 - q) / (1.0 - self.cdfs[n])) / self.upper_rate;
        }
        let i = self
            .cdfs
            .partition_point(|&c| c <= q)
            .saturating_sub(1)
            .min(n - 1);
        let [c0, c1, c2, c3] = self.cubic(i);
        let h = self.xs[i + 1] - self.xs[i];
        let s = brent(
            |s| c0 - q + s * (c1 + s * (c2 + s * c3)),
            0.0,
            h,
            1e-15 * h,
            "table quantile",
        )
        .unwrap_or(0.5 * h);
        self.xs[i] + s
    }

    fn isf(&self, q: f64) -> f64 {
        let n = self.last();
        if q <= 1.0 - self.cdfs[n] {
            self.xs[n] - libm::log(q / (1.0 - self.cdfs[n])) / self.upper_rate
        } else {
            self.quantile(1.0 - q)
        }
    }
}

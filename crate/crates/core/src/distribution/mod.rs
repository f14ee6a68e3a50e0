//! Idiosyncratic willingness-to-pay laws and the functions derived from them.
//!
//! For a fraction of buyers `eta`, `Gamma(eta) = -F^{-1}(1 - eta)` is the
//! social-term offset at which exactly that fraction wants to buy. Its
//! supply-side analogue is `Gamma~(eta) = d/deta [eta Gamma(eta)]`. All
//! derivatives are analytic in terms of the pdf and its first two derivatives:
//!
//! ```text
//! Gamma'   = 1 / f
//! Gamma''  = f' / f^3
//! Gamma''' = (3 f'^2 - f f'') / f^5
//! ```
//! evaluated at `x = F^{-1}(1 - eta)`.

use alloc::vec::Vec;

use crate::roots::{brent, scan_sign_change};
use crate::{Error, Result, ETA_CLAMP};

mod gaussian;
mod logistic;
mod tabulated;

pub use gaussian::Gaussian;
pub use logistic::Logistic;
pub use tabulated::Tabulated;

/// A continuous law on the real line with a smooth, positive density.
///
/// Implementors should have zero mean, unit variance and a single mode.
pub trait Iwp {
    /// Density `f(x)`.
    fn pdf(&self, x: f64) -> f64;
    /// First derivative `f'(x)`.
    fn pdf_prime(&self, x: f64) -> f64;
    /// Second derivative `f''(x)`.
    fn pdf_second(&self, x: f64) -> f64;
    /// Cumulative function `F(x)`.
    fn cdf(&self, x: f64) -> f64;
    /// Survival function `1 - F(x)`; override when it can be computed without cancellation.
    fn sf(&self, x: f64) -> f64 {
        1.0 - self.cdf(x)
    }
    /// Inverse of the cumulative function.
    fn quantile(&self, q: f64) -> f64;
    /// Inverse of the survival function: `x` such that `1 - F(x) = q`.
    fn isf(&self, q: f64) -> f64 {
        self.quantile(1.0 - q)
    }
}

impl<D: Iwp + ?Sized> Iwp for &D {
    fn pdf(&self, x: f64) -> f64 {
        (**self).pdf(x)
    }
    fn pdf_prime(&self, x: f64) -> f64 {
        (**self).pdf_prime(x)
    }
    fn pdf_second(&self, x: f64) -> f64 {
        (**self).pdf_second(x)
    }
    fn cdf(&self, x: f64) -> f64 {
        (**self).cdf(x)
    }
    fn sf(&self, x: f64) -> f64 {
        (**self).sf(x)
    }
    fn quantile(&self, q: f64) -> f64 {
        (**self).quantile(q)
    }
    fn isf(&self, q: f64) -> f64 {
        (**self).isf(q)
    }
}

/// Runtime choice among the supported laws.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    /// Unit-variance logistic.
    Logistic(Logistic),
    /// Standard normal.
    Gaussian(Gaussian),
    /// User-supplied cumulative table.
    Tabulated(Tabulated),
}

impl Distribution {
    /// Short identifier used in output files.
    pub fn name(&self) -> &'static str {
        match self {
            Distribution::Logistic(_) => "logistic",
            Distribution::Gaussian(_) => "gaussian",
            Distribution::Tabulated(_) => "table",
        }
    }
}

macro_rules! dispatch {
    ($self:ident, $d:ident => $e:expr) => {
        match $self {
            Distribution::Logistic($d) => $e,
            Distribution::Gaussian($d) => $e,
            Distribution::Tabulated($d) => $e,
        }
    };
}

impl Iwp for Distribution {
    fn pdf(&self, x: f64) -> f64 {
        dispatch!(self, d => d.pdf(x))
    }
    fn pdf_prime(&self, x: f64) -> f64 {
        dispatch!(self, d => d.pdf_prime(x))
    }
    fn pdf_second(&self, x: f64) -> f64 {
        dispatch!(self, d => d.pdf_second(x))
    }
    fn cdf(&self, x: f64) -> f64 {
        dispatch!(self, d => d.cdf(x))
    }
    fn sf(&self, x: f64) -> f64 {
        dispatch!(self, d => d.sf(x))
    }
    fn quantile(&self, q: f64) -> f64 {
        dispatch!(self, d => d.quantile(q))
    }
    fn isf(&self, q: f64) -> f64 {
        dispatch!(self, d => d.isf(q))
    }
}

/// Mean and variance by composite Gauss-Legendre quadrature.
///
/// The integration range is cut at the `1e-15` and `1 - 1e-15` quantiles.
pub fn moments<D: Iwp>(dist: &D) -> (f64, f64) {
    const NODES: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683_1,
        0.0,
        0.538_469_310_105_683_1,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.236_926_885_056_189_1,
        0.478_628_670_499_366_5,
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
    ];
    const PANELS: usize = 4000;
    let lo = dist.quantile(1e-15);
    let hi = dist.isf(1e-15);
    let width = (hi - lo) / PANELS as f64;
    let (mut m1, mut m2) = (0.0, 0.0);
    for k in 0..PANELS {
        let mid = lo + (k as f64 + 0.5) * width;
        for (t, w) in NODES.iter().zip(WEIGHTS) {
            let x = mid + 0.5 * width * t;
            let wf = 0.5 * width * w * dist.pdf(x);
            m1 += wf * x;
            m2 += wf * x * x;
        }
    }
    (m1, m2 - m1 * m1)
}

/// Location and height of the density's mode, and the demand cusp it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CriticalScalars {
    /// Mode of the density.
    pub x_mode: f64,
    /// Maximum density `f_B`.
    pub f_b: f64,
    /// Fraction of buyers at the demand cusp, `1 - F(x_mode)`.
    pub eta_b: f64,
    /// Critical social strength `1 / f_B`.
    pub j_b: f64,
}

/// `Gamma` and its first three derivatives at one fraction of buyers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaJet {
    /// Fraction of buyers (after clamping).
    pub eta: f64,
    /// Idiosyncratic value of the marginal buyer, `F^{-1}(1 - eta)`.
    pub x: f64,
    /// `Gamma(eta)`.
    pub value: f64,
    /// `Gamma'(eta)`.
    pub d1: f64,
    /// `Gamma''(eta)`.
    pub d2: f64,
    /// `Gamma'''(eta)`.
    pub d3: f64,
}

impl GammaJet {
    /// `Gamma~ = Gamma + eta Gamma'`.
    pub fn tilde(&self) -> f64 {
        self.value + self.eta * self.d1
    }

    /// `Gamma~' = 2 Gamma' + eta Gamma''`.
    pub fn tilde_d1(&self) -> f64 {
        2.0 * self.d1 + self.eta * self.d2
    }

    /// `Gamma~'' = 3 Gamma'' + eta Gamma'''`.
    pub fn tilde_d2(&self) -> f64 {
        3.0 * self.d2 + self.eta * self.d3
    }
}

/// Outcome of the supply regularity check.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegularityReport {
    /// Whether `d^2/dx^2 [1 / (1 - F)] > 0` held at every grid point.
    pub regular: bool,
    /// Smallest grid abscissa where the condition failed.
    pub first_violation: Option<f64>,
    /// Number of grid points examined.
    pub points: usize,
}

/// The `Gamma` family of a distribution, with its critical scalars cached.
#[derive(Debug, Clone)]
pub struct GammaFunctions<D> {
    dist: D,
    scalars: CriticalScalars,
}

impl<D: Iwp> GammaFunctions<D> {
    /// Locates the mode of `dist` and caches the demand cusp.
    pub fn new(dist: D) -> Result<Self> {
        let scalars = locate_mode(&dist)?;
        Ok(GammaFunctions { dist, scalars })
    }

    /// Underlying distribution.
    pub fn distribution(&self) -> &D {
        &self.dist
    }

    /// `(f_B, eta_B, j_B)` with the mode location.
    pub fn critical_scalars(&self) -> CriticalScalars {
        self.scalars
    }

    /// Checks `eta` lies in `(0, 1)` and clamps it to `[1e-12, 1 - 1e-12]`.
    pub fn clamp_eta(eta: f64) -> Result<f64> {
        if eta > 0.0 && eta < 1.0 {
            Ok(eta.clamp(ETA_CLAMP, 1.0 - ETA_CLAMP))
        } else {
            Err(Error::Domain {
                what: "eta",
                value: eta,
            })
        }
    }

    /// All derivatives at once; `eta` must already be clamped.
    pub(crate) fn jet_clamped(&self, eta: f64) -> GammaJet {
        let x = self.dist.isf(eta);
        let f = self.dist.pdf(x);
        let fp = self.dist.pdf_prime(x);
        let fpp = self.dist.pdf_second(x);
        let f2 = f * f;
        GammaJet {
            eta,
            x,
            value: -x,
            d1: 1.0 / f,
            d2: fp / (f2 * f),
            d3: (3.0 * fp * fp - f * fpp) / (f2 * f2 * f),
        }
    }

    /// `Gamma` and its derivatives at `eta`.
    pub fn jet(&self, eta: f64) -> Result<GammaJet> {
        Ok(self.jet_clamped(Self::clamp_eta(eta)?))
    }

    /// `Gamma(eta) = -F^{-1}(1 - eta)`.
    pub fn gamma(&self, eta: f64) -> Result<f64> {
        Ok(-self.dist.isf(Self::clamp_eta(eta)?))
    }

    /// `Gamma'(eta)`.
    pub fn gamma_d1(&self, eta: f64) -> Result<f64> {
        self.jet(eta).map(|g| g.d1)
    }

    /// `Gamma''(eta)`.
    pub fn gamma_d2(&self, eta: f64) -> Result<f64> {
        self.jet(eta).map(|g| g.d2)
    }

    /// `Gamma'''(eta)`.
    pub fn gamma_d3(&self, eta: f64) -> Result<f64> {
        self.jet(eta).map(|g| g.d3)
    }

    /// `Gamma~(eta) = Gamma(eta) + eta Gamma'(eta)`.
    pub fn gamma_tilde(&self, eta: f64) -> Result<f64> {
        self.jet(eta).map(|g| g.tilde())
    }

    /// `Gamma~'(eta)`.
    pub fn gamma_tilde_d1(&self, eta: f64) -> Result<f64> {
        self.jet(eta).map(|g| g.tilde_d1())
    }

    /// `Gamma~''(eta)`.
    pub fn gamma_tilde_d2(&self, eta: f64) -> Result<f64> {
        self.jet(eta).map(|g| g.tilde_d2())
    }

    /// Checks `d^2/dx^2 [1/(1 - F(x))] > 0` on `grid`.
    ///
    /// The second derivative has the sign of `f'(x) (1 - F(x)) + 2 f(x)^2`,
    /// which is also the sign of `Gamma~'`. When it holds everywhere the
    /// supply problem has the same structure as the demand problem.
    pub fn check_supply_regularity(&self, grid: &[f64]) -> RegularityReport {
        let first_violation = grid.iter().copied().find(|&x| {
            let f = self.dist.pdf(x);
            !(self.dist.pdf_prime(x) * self.dist.sf(x) + 2.0 * f * f > 0.0)
        });
        RegularityReport {
            regular: first_violation.is_none(),
            first_violation,
            points: grid.len(),
        }
    }

    /// `n` abscissas at equispaced quantiles spanning `[1e-8, 1 - 1e-8]`.
    pub fn regularity_grid(&self, n: usize) -> Vec<f64> {
        let (lo, hi) = (1e-8, 1.0 - 1e-8);
        let n = n.max(2);
        (0..n)
            .map(|k| self.dist.quantile(lo + (hi - lo) * k as f64 / (n - 1) as f64))
            .collect()
    }
}

/// Default size of the regularity grid.
pub const REGULARITY_GRID: usize = 4096;

fn locate_mode<D: Iwp>(dist: &D) -> Result<CriticalScalars> {
    let mut grid: Vec<f64> = Vec::with_capacity(260);
    grid.push(dist.quantile(1e-10));
    grid.extend((1..256).map(|k| dist.quantile(k as f64 / 256.0)));
    grid.push(dist.isf(1e-10));
    let (a, b) = scan_sign_change(|x| dist.pdf_prime(x), &grid).ok_or(Error::NoBracket {
        what: "mode of the density",
    })?;
    let x_mode = if a == b {
        a
    } else {
        brent(|x| dist.pdf_prime(x), a, b, 1e-15, "mode of the density")?
    };
    let f_b = dist.pdf(x_mode);
    Ok(CriticalScalars {
        x_mode,
        f_b,
        eta_b: dist.sf(x_mode),
        j_b: 1.0 / f_b,
    })
}

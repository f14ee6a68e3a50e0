//! Phase diagrams of the customers and of the monopolist.
//!
//! In the `(j, p_hat)` plane the customers' diagram is bounded by the lines
//! `p_hat_L(j)` and `p_hat_U(j)` meeting at the cusp `B`. In the `(j, h)`
//! plane the supply diagram holds the coexistence lines `h_+(j)`, `h_-(j)`
//! meeting at the apex `A`, the first-order line `h_ch(j)` where the optimal
//! strategy jumps, the null-price line `h_0(j) = -p_hat_U(j)`, the mirrored
//! demand line `-p_hat_L(j)` and the risk lines `h_M(j)`, `h_m(j)`.

use alloc::vec::Vec;

use crate::distribution::Iwp;
use crate::roots::{brent, seeded_root};
use crate::supply::SupplyExtrema;
use crate::{Error, Market, Result, ETA_CLAMP};

const H_TOL: f64 = 1e-12;
const ETA_TOL: f64 = 1e-15;
/// Distance in `j` from `A` or `B` within which curves take the cusp value.
pub const CUSP_CLOSURE: f64 = 1e-5;

/// Every traced line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum CurveName {
    /// Lower edge `p_hat_L(j)` of the customers' coexistence band.
    PL,
    /// Upper edge `p_hat_U(j)` of the customers' coexistence band.
    PU,
    /// `h_+(j)`, lower edge of the supply coexistence region.
    HPlus,
    /// `h_-(j)`, upper edge of the supply coexistence region.
    HMinus,
    /// First-order line `h_ch(j)`.
    HCh,
    /// Null-price line `h_0(j) = -p_hat_U(j)`.
    HZero,
    /// `h_M(j)`: above it a high-branch optimum needs coordination.
    HBigM,
    /// `h_m(j)`: below it a low-branch optimum may turn into a windfall.
    HSmallM,
    /// `-p_hat_L(j)`.
    MinusPL,
    /// `-p_hat_U(j)`, identical to the null-price line.
    MinusPU,
}

impl CurveName {
    /// Every curve, customer lines first.
    pub const ALL: [CurveName; 10] = [
        CurveName::PL,
        CurveName::PU,
        CurveName::HPlus,
        CurveName::HMinus,
        CurveName::HCh,
        CurveName::HZero,
        CurveName::HBigM,
        CurveName::HSmallM,
        CurveName::MinusPL,
        CurveName::MinusPU,
    ];

    /// Short label.
    pub fn as_str(self) -> &'static str {
        match self {
            CurveName::PL => "pL",
            CurveName::PU => "pU",
            CurveName::HPlus => "h_plus",
            CurveName::HMinus => "h_minus",
            CurveName::HCh => "h_ch",
            CurveName::HZero => "h_zero",
            CurveName::HBigM => "h_M",
            CurveName::HSmallM => "h_m",
            CurveName::MinusPL => "minus_pL",
            CurveName::MinusPU => "minus_pU",
        }
    }

    /// Stem of the CSV file the curve is written to.
    pub fn file_stem(self) -> &'static str {
        match self {
            CurveName::PL => "phase_customer_pL",
            CurveName::PU => "phase_customer_pU",
            CurveName::HPlus => "phase_supply_hplus",
            CurveName::HMinus => "phase_supply_hminus",
            CurveName::HCh => "phase_supply_hch",
            CurveName::HZero => "phase_supply_hzero",
            CurveName::HBigM => "phase_supply_hM",
            CurveName::HSmallM => "phase_supply_hm",
            CurveName::MinusPL => "phase_supply_minus_pL",
            CurveName::MinusPU => "phase_supply_minus_pU",
        }
    }

    /// Whether the curve belongs to the customers' diagram.
    pub fn is_customer(self) -> bool {
        matches!(self, CurveName::PL | CurveName::PU)
    }

    fn starts_at_apex(self) -> bool {
        matches!(self, CurveName::HPlus | CurveName::HMinus | CurveName::HCh)
    }
}

/// A traced line as `(j, value)` samples.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PhaseCurve {
    /// Which line.
    pub name: CurveName,
    /// Samples, strictly increasing in `j`.
    pub samples: Vec<(f64, f64)>,
    /// The line exists for `j >= j_start` (`j_A` or `j_B`).
    pub j_start: f64,
}

/// Refinement controls for [`Market::phase_curve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceOptions {
    /// Largest tolerated value gap between successive samples.
    pub max_gap: f64,
    /// Maximum number of bisections of one grid interval.
    pub max_depth: u32,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            max_gap: 0.02,
            max_depth: 10,
        }
    }
}

/// A labelled point of a phase diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CriticalPoint {
    /// Social strength.
    pub j: f64,
    /// `h` for supply points, `p_hat` for the demand cusp.
    pub value: f64,
    /// Fraction of buyers defining the point.
    pub eta: f64,
}

/// The critical points `A`, `B`, `C`, `D`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CriticalPoints {
    /// Apex of the supply coexistence region.
    pub a: CriticalPoint,
    /// Cusp of the customers' diagram, `(j_B, p_hat_B)`.
    pub b_demand: CriticalPoint,
    /// Its image `(j_B, h_B = -p_hat_B)` in the supply diagram.
    pub b_supply: CriticalPoint,
    /// Where `h_m` meets `h_-`; `eta` is `eta_m(j_C)`.
    pub c: CriticalPoint,
    /// Where `h_m` meets `-p_hat_L`; `eta` is `eta_m(j_D)`.
    pub d: CriticalPoint,
}

/// Roots defining the risk lines at one `j > j_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RiskPoints {
    /// Social strength.
    pub j: f64,
    /// High-branch root of `D(j; eta) = p_hat_L(j)`.
    pub eta_big_m: f64,
    /// `-D~(j; eta_M)`.
    pub h_big_m: f64,
    /// Low-branch root of `D(j; eta) = p_hat_U(j)`.
    pub eta_small_m: f64,
    /// `-D~(j; eta_m)`.
    pub h_small_m: f64,
}

/// Geometric grid of `n` points from `start` to `end`.
pub fn geometric_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![start];
    }
    let ratio = libm::log(end / start) / (n - 1) as f64;
    (0..n).map(|k| start * libm::exp(ratio * k as f64)).collect()
}

impl<D: Iwp> Market<D> {
    /// Default `j` grid: 400 geometric points from `1.05 j_A` to 10.
    pub fn default_j_grid(&self) -> Vec<f64> {
        geometric_grid(1.05 * self.apex().j_a, 10.0, 400)
    }

    /// `(h_+, h_-)` at `j`, or `None` below `j_A`.
    pub fn coexistence_point(&self, j: f64) -> Option<(f64, f64)> {
        self.supply_extrema(j).map(|e| (e.h_plus, e.h_minus))
    }

    fn low_high_profits(&self, j: f64, h: f64, e: &SupplyExtrema) -> Result<(f64, f64)> {
        let residual = |eta: f64| self.d_tilde_clamped(j, eta) + h;
        let pi = |eta: f64| (h + self.d_clamped(j, eta)) * eta;
        let low = if residual(ETA_CLAMP) < 0.0 {
            0.0
        } else {
            pi(brent(
                residual,
                ETA_CLAMP,
                e.eta_minus,
                ETA_TOL,
                "low supply root",
            )?)
        };
        let high = brent(residual, e.eta_plus, 1.0 - ETA_CLAMP, ETA_TOL, "high supply root")?;
        Ok((low, pi(high)))
    }

    /// First-order line: the `h` at which low- and high-branch maxima earn
    /// the same profit.
    pub fn first_order_line(&self, j: f64) -> Result<f64> {
        self.first_order_seeded(j, None)
    }

    fn first_order_seeded(&self, j: f64, seed: Option<f64>) -> Result<f64> {
        let e = self
            .supply_extrema(j)
            .filter(|_| j > self.apex().j_a)
            .ok_or(Error::Domain {
                what: "j <= j_A for h_ch",
                value: j,
            })?;
        let floor = match self.branch_boundaries(j) {
            Some(b) => e.h_plus.max(-b.p_hat_u),
            None => e.h_plus,
        };
        let ceil = e.h_minus;
        if ceil - floor < 1e-9 {
            return Ok(0.5 * (floor + ceil));
        }
        let gap = |h: f64| match self.low_high_profits(j, h, &e) {
            Ok((low, high)) => high - low.max(0.0),
            Err(_) => f64::NAN,
        };
        const WHAT: &str = "h_ch";
        let solve = |floor: f64| match seed {
            Some(s) if s > floor && s < ceil => {
                seeded_root(gap, s, 1e-3 * (ceil - floor), floor, ceil, H_TOL, WHAT)
            }
            _ => brent(gap, floor, ceil, H_TOL, WHAT),
        };
        match solve(floor) {
            Err(Error::NoBracket { .. }) if floor > e.h_plus => solve(e.h_plus),
            r => r,
        }
    }

    /// Null-price line `h_0(j) = -p_hat_U(j)`, or `None` below `j_B`.
    pub fn null_price_line(&self, j: f64) -> Option<f64> {
        self.branch_boundaries(j).map(|b| -b.p_hat_u)
    }

    /// `eta_M`, `h_M`, `eta_m`, `h_m` at `j`, or `None` below `j_B`.
    pub fn risk_points(&self, j: f64) -> Option<RiskPoints> {
        let b = self.branch_boundaries(j)?;
        let (eta_big_m, eta_small_m) = if b.eta_u > b.eta_l {
            let big = brent(
                |eta| self.d_clamped(j, eta) - b.p_hat_l,
                b.eta_u,
                1.0 - ETA_CLAMP,
                ETA_TOL,
                "eta_M",
            )
            .unwrap_or(1.0 - ETA_CLAMP);
            let small = brent(
                |eta| self.d_clamped(j, eta) - b.p_hat_u,
                ETA_CLAMP,
                b.eta_l,
                ETA_TOL,
                "eta_m",
            )
            .unwrap_or(ETA_CLAMP);
            (big, small)
        } else {
            (b.eta_l, b.eta_l)
        };
        Some(RiskPoints {
            j,
            eta_big_m,
            h_big_m: -self.d_tilde_clamped(j, eta_big_m),
            eta_small_m,
            h_small_m: -self.d_tilde_clamped(j, eta_small_m),
        })
    }

    /// Locates `A`, `B`, `C` and `D`.
    pub fn critical_points(&self) -> Result<CriticalPoints> {
        let apex = self.apex();
        let (j_b, eta_b, p_b) = (self.j_b(), self.eta_b(), self.p_hat_b());

        let c_gap = |j: f64| match (self.risk_points(j), self.supply_extrema(j)) {
            (Some(r), Some(e)) => r.eta_small_m - e.eta_minus,
            _ => f64::NAN,
        };
        let j_c = scan_in_j(c_gap, j_b + 1e-4, "j_C")?;
        let d_gap = |j: f64| match (self.risk_points(j), self.branch_boundaries(j)) {
            (Some(r), Some(b)) => r.h_small_m + b.p_hat_l,
            _ => f64::NAN,
        };
        let j_d = scan_in_j(d_gap, j_b + 1e-3, "j_D")?;
        let at = |j: f64| -> Result<CriticalPoint> {
            let r = self.risk_points(j).ok_or(Error::Domain {
                what: "critical j",
                value: j,
            })?;
            Ok(CriticalPoint {
                j,
                value: r.h_small_m,
                eta: r.eta_small_m,
            })
        };
        Ok(CriticalPoints {
            a: CriticalPoint {
                j: apex.j_a,
                value: apex.h_a,
                eta: apex.eta_a,
            },
            b_demand: CriticalPoint {
                j: j_b,
                value: p_b,
                eta: eta_b,
            },
            b_supply: CriticalPoint {
                j: j_b,
                value: -p_b,
                eta: eta_b,
            },
            c: at(j_c)?,
            d: at(j_d)?,
        })
    }

    fn curve_value(&self, name: CurveName, j: f64, seed: Option<f64>) -> Result<Option<f64>> {
        let apex = self.apex();
        let j_b = self.j_b();
        if name.starts_at_apex() {
            if j < apex.j_a {
                return Ok(None);
            }
            if j - apex.j_a < CUSP_CLOSURE {
                return Ok(Some(apex.h_a));
            }
        } else {
            if j < j_b {
                return Ok(None);
            }
            if j - j_b < CUSP_CLOSURE {
                let p = self.p_hat_b();
                return Ok(Some(if name.is_customer() { p } else { -p }));
            }
        }
        let v = match name {
            CurveName::HPlus => self.supply_extrema(j).map(|e| e.h_plus),
            CurveName::HMinus => self.supply_extrema(j).map(|e| e.h_minus),
            CurveName::HCh => Some(self.first_order_seeded(j, seed)?),
            CurveName::PL => self.branch_boundaries(j).map(|b| b.p_hat_l),
            CurveName::PU => self.branch_boundaries(j).map(|b| b.p_hat_u),
            CurveName::MinusPL => self.branch_boundaries(j).map(|b| -b.p_hat_l),
            CurveName::HZero | CurveName::MinusPU => self.null_price_line(j),
            CurveName::HBigM => self.risk_points(j).map(|r| r.h_big_m),
            CurveName::HSmallM => self.risk_points(j).map(|r| r.h_small_m),
        };
        Ok(v)
    }

    /// Traces one line over `j_grid`, keeping only the points where it exists.
    ///
    /// Each root seeds the next. Intervals whose value gap exceeds
    /// `opts.max_gap` are bisected up to `opts.max_depth` times.
    pub fn phase_curve(&self, name: CurveName, j_grid: &[f64], opts: TraceOptions) -> Result<PhaseCurve> {
        let j_start = if name.starts_at_apex() {
            self.apex().j_a
        } else {
            self.j_b()
        };
        let mut grid: Vec<f64> = j_grid.iter().copied().filter(|j| j.is_finite()).collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();

        let mut samples: Vec<(f64, f64)> = Vec::with_capacity(grid.len());
        for &j in &grid {
            let seed = samples.last().map(|s| s.1);
            let Some(v) = self.curve_value(name, j, seed)? else {
                continue;
            };
            if let Some(&(j0, v0)) = samples.last() {
                self.refine(name, (j0, v0), (j, v), opts, opts.max_depth, &mut samples)?;
            }
            samples.push((j, v));
        }
        Ok(PhaseCurve {
            name,
            samples,
            j_start,
        })
    }

    fn refine(
        &self,
        name: CurveName,
        left: (f64, f64),
        right: (f64, f64),
        opts: TraceOptions,
        depth: u32,
        out: &mut Vec<(f64, f64)>,
    ) -> Result<()> {
        if depth == 0 || (right.1 - left.1).abs() <= opts.max_gap {
            return Ok(());
        }
        let jm = 0.5 * (left.0 + right.0);
        if !(jm > left.0 && jm < right.0) {
            return Ok(());
        }
        let Some(vm) = self.curve_value(name, jm, Some(left.1))? else {
            return Ok(());
        };
        self.refine(name, left, (jm, vm), opts, depth - 1, out)?;
        out.push((jm, vm));
        self.refine(name, (jm, vm), right, opts, depth - 1, out)
    }

    /// `(h_+, h_-)` traced over `j_grid`.
    pub fn coexistence_lines(&self, j_grid: &[f64]) -> Result<(PhaseCurve, PhaseCurve)> {
        let o = TraceOptions::default();
        Ok((
            self.phase_curve(CurveName::HPlus, j_grid, o)?,
            self.phase_curve(CurveName::HMinus, j_grid, o)?,
        ))
    }

    /// `(-p_hat_L, -p_hat_U)` traced over `j_grid`.
    pub fn demand_mirror_lines(&self, j_grid: &[f64]) -> Result<(PhaseCurve, PhaseCurve)> {
        let o = TraceOptions::default();
        Ok((
            self.phase_curve(CurveName::MinusPL, j_grid, o)?,
            self.phase_curve(CurveName::MinusPU, j_grid, o)?,
        ))
    }

    /// `(h_M, h_m)` traced over `j_grid`.
    pub fn risk_lines(&self, j_grid: &[f64]) -> Result<(PhaseCurve, PhaseCurve)> {
        let o = TraceOptions::default();
        Ok((
            self.phase_curve(CurveName::HBigM, j_grid, o)?,
            self.phase_curve(CurveName::HSmallM, j_grid, o)?,
        ))
    }
}

// Steps geometrically upward from `start` until `f` changes sign, then refines.
fn scan_in_j(mut f: impl FnMut(f64) -> f64, start: f64, what: &'static str) -> Result<f64> {
    let mut a = start;
    let mut fa = f(a);
    while a < 100.0 {
        let b = a * 1.01;
        let fb = f(b);
        if fa.is_nan() || fb.is_nan() {
            return Err(Error::NoBracket { what });
        }
        if fa.is_sign_negative() != fb.is_sign_negative() || fb == 0.0 {
            return brent(f, a, b, 1e-13, what);
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoBracket { what })
}

//! Monopolist's pricing program.
//!
//! Per-capita profit is `pi = p eta` with `p = h + D(j; eta)` on a stable
//! demand branch. Interior extrema satisfy `-h = D~(j; eta)` where
//! `D~(j; eta) = 2 j eta - Gamma~(eta)` is the marginal revenue; for
//! `j > j_A` that equation can have three roots and the outer two are both
//! profit maxima. For `j > j_B` the end `eta_L` of the low demand branch is a
//! further local maximum whenever its price is positive.

use alloc::vec::Vec;

use crate::demand::BranchBoundaries;
use crate::distribution::Iwp;
use crate::roots::brent;
use crate::{Error, Market, Result, ETA_CLAMP};

const ETA_TOL: f64 = 1e-15;
/// Relative profit difference under which two maxima are considered tied.
pub const TIE_REL_TOL: f64 = 1e-10;

/// Origin of a profit maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SupplyKind {
    /// Single interior maximum (`j <= j_A`).
    InteriorUnique,
    /// Interior maximum left of the minimum of `D~`.
    InteriorLow,
    /// Interior maximum right of the maximum of `D~`.
    InteriorHigh,
    /// End of the low demand branch at `eta_L`.
    BoundaryL,
}

impl SupplyKind {
    /// Label used in output files.
    pub fn as_str(self) -> &'static str {
        match self {
            SupplyKind::InteriorUnique => "interior_unique",
            SupplyKind::InteriorLow => "interior_low",
            SupplyKind::InteriorHigh => "interior_high",
            SupplyKind::BoundaryL => "boundary_l",
        }
    }
}

/// A local maximum of the profit.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SupplyCandidate {
    /// Fraction of buyers.
    pub eta: f64,
    /// Price net of unit cost.
    pub price: f64,
    /// Shifted price `price - h`.
    pub p_hat: f64,
    /// Per-capita profit `price * eta`.
    pub profit: f64,
    /// Origin.
    pub kind: SupplyKind,
    /// Non-negative price on a stable demand branch.
    pub viable: bool,
    /// `p_hat` lies strictly inside the coexistence band of demand.
    pub in_multivalued_demand: bool,
}

/// Coordination diagnostics of the selected strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RiskFlags {
    /// The optimum sits on the high branch while a low equilibrium also exists.
    pub coordination_required: bool,
    /// `p_hat_U - p_hat_s` for a high-branch optimum when `j > j_B`.
    pub criticality_margin: Option<f64>,
    /// The optimum sits on the low branch while a high equilibrium also exists.
    pub windfall_possible: bool,
    /// Low and high maxima have equal profit within [`TIE_REL_TOL`].
    pub tie: bool,
}

/// Result of the pricing program at one `(j, h)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SupplyOptimum {
    /// Social strength.
    pub j: f64,
    /// Mean willingness to pay net of cost.
    pub h: f64,
    /// Every local maximum found, ordered by `eta`.
    pub candidates: Vec<SupplyCandidate>,
    /// Most profitable viable candidate.
    pub global: SupplyCandidate,
    /// Diagnostics.
    pub flags: RiskFlags,
}

/// Extrema of `D~(j; .)`: its minimum `eta_minus` and maximum `eta_plus`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SupplyExtrema {
    /// Social strength.
    pub j: f64,
    /// Location of the minimum of `D~`, below `eta_A`.
    pub eta_minus: f64,
    /// Location of the maximum of `D~`, above `eta_A`.
    pub eta_plus: f64,
    /// `-D~(j; eta_minus)`: largest `h` with a low-branch interior maximum.
    pub h_minus: f64,
    /// `-D~(j; eta_plus)`: smallest `h` with a high-branch interior maximum.
    pub h_plus: f64,
}

/// Sample of the price and profit curves along `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ProfitPoint {
    /// Fraction of buyers.
    pub eta: f64,
    /// Demand price `h + D(j; eta)`.
    pub p_d: f64,
    /// Effective supply price `eta (Gamma'(eta) - j)`.
    pub p_s: f64,
    /// Profit `p_d * eta`.
    pub pi: f64,
}

impl<D: Iwp> Market<D> {
    /// Marginal revenue `D~(j; eta) = 2 j eta - Gamma~(eta)`.
    pub fn d_tilde(&self, j: f64, eta: f64) -> Result<f64> {
        Ok(2.0 * j * eta - self.gamma().gamma_tilde(eta)?)
    }

    /// Slope `D~'(j; eta) = 2 j - Gamma~'(eta)`.
    pub fn d_tilde_prime(&self, j: f64, eta: f64) -> Result<f64> {
        Ok(2.0 * j - self.gamma().gamma_tilde_d1(eta)?)
    }

    pub(crate) fn d_tilde_clamped(&self, j: f64, eta: f64) -> f64 {
        2.0 * j * eta - self.gamma().jet_clamped(eta).tilde()
    }

    /// Effective supply price `p^s(eta) = -eta D'(j; eta)`.
    pub fn effective_supply_price(&self, j: f64, eta: f64) -> Result<f64> {
        Ok(eta * (self.gamma().gamma_d1(eta)? - j))
    }

    /// Extrema of `D~(j; .)`, or `None` when `j < j_A` (it is then monotone).
    pub fn supply_extrema(&self, j: f64) -> Option<SupplyExtrema> {
        let apex = self.apex();
        if !j.is_finite() || j < apex.j_a {
            return None;
        }
        let slope_gap = |eta: f64| self.gamma().jet_clamped(eta).tilde_d1() - 2.0 * j;
        let (eta_minus, eta_plus) = if j == apex.j_a {
            (apex.eta_a, apex.eta_a)
        } else {
            (
                brent(slope_gap, ETA_CLAMP, apex.eta_a, ETA_TOL, "eta_-").unwrap_or(ETA_CLAMP),
                brent(slope_gap, apex.eta_a, 1.0 - ETA_CLAMP, ETA_TOL, "eta_+").unwrap_or(1.0 - ETA_CLAMP),
            )
        };
        Some(SupplyExtrema {
            j,
            eta_minus,
            eta_plus,
            h_minus: -self.d_tilde_clamped(j, eta_minus),
            h_plus: -self.d_tilde_clamped(j, eta_plus),
        })
    }

    fn candidate(
        &self,
        j: f64,
        h: f64,
        eta: f64,
        kind: SupplyKind,
        bounds: Option<&BranchBoundaries>,
    ) -> SupplyCandidate {
        let p_hat = self.d_clamped(j, eta);
        let price = h + p_hat;
        let in_gap = bounds.is_some_and(|b| b.in_gap(eta));
        SupplyCandidate {
            eta,
            price,
            p_hat,
            profit: price * eta,
            kind,
            viable: price >= 0.0 && !in_gap,
            in_multivalued_demand: bounds.is_some_and(|b| b.contains(p_hat)),
        }
    }

    /// Profit maxima solving `-h = D~(j; eta)` with `D~' <= 0`.
    ///
    /// The middle root, a profit minimum, is not returned. Candidates in the
    /// unstable demand gap are kept but marked non-viable.
    pub fn interior_extrema(&self, j: f64, h: f64) -> Result<Vec<SupplyCandidate>> {
        check_inputs(j, h)?;
        let bounds = self.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l);
        let residual = |eta: f64| self.d_tilde_clamped(j, eta) + h;
        let lo = ETA_CLAMP;
        let hi = 1.0 - ETA_CLAMP;
        let mut out = Vec::with_capacity(2);

        // D~ is decreasing on each piece; a root exists iff the residual
        // is non-negative at the left end and non-positive at the right end.
        let mut solve = |a: f64, b: f64, kind: SupplyKind| -> Result<()> {
            if residual(b) > 0.0 {
                return Ok(());
            }
            let ra = residual(a);
            if ra < 0.0 {
                if a == lo {
                    out.push(self.candidate(j, h, lo, kind, bounds.as_ref()));
                }
                return Ok(());
            }
            let eta = brent(residual, a, b, ETA_TOL, "supply equation")?;
            out.push(self.candidate(j, h, eta, kind, bounds.as_ref()));
            Ok(())
        };
        match self.supply_extrema(j).filter(|e| e.eta_plus > e.eta_minus) {
            None => solve(lo, hi, SupplyKind::InteriorUnique)?,
            Some(e) => {
                solve(lo, e.eta_minus, SupplyKind::InteriorLow)?;
                solve(e.eta_plus, hi, SupplyKind::InteriorHigh)?;
            }
        }
        Ok(out)
    }

    /// Local maximum at the end `eta_L` of the low demand branch.
    ///
    /// Exists for `j > j_B` when its price `h + p_hat_L` is positive.
    pub fn boundary_extrema(&self, j: f64, h: f64) -> Result<Option<SupplyCandidate>> {
        check_inputs(j, h)?;
        let Some(b) = self.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l) else {
            return Ok(None);
        };
        if h + b.p_hat_l <= 0.0 {
            return Ok(None);
        }
        let mut c = self.candidate(j, h, b.eta_l, SupplyKind::BoundaryL, Some(&b));
        c.p_hat = b.p_hat_l;
        c.price = h + b.p_hat_l;
        c.profit = c.price * b.eta_l;
        Ok(Some(c))
    }

    /// All local maxima and the selected global optimum with its risk flags.
    pub fn optimize(&self, j: f64, h: f64) -> Result<SupplyOptimum> {
        let mut candidates = self.interior_extrema(j, h)?;
        if let Some(c) = self.boundary_extrema(j, h)? {
            candidates.push(c);
        }
        candidates.sort_by(|a, b| a.eta.total_cmp(&b.eta));

        let mut best: Option<SupplyCandidate> = None;
        for c in candidates.iter().filter(|c| c.viable) {
            if best.is_none_or(|b| c.profit > b.profit) {
                best = Some(*c);
            }
        }
        let mut global = best.ok_or(Error::NoViableStrategy)?;

        let find = |kind| candidates.iter().find(|c| c.viable && c.kind == kind);
        let mut tie = false;
        if let (Some(low), Some(high)) = (find(SupplyKind::InteriorLow), find(SupplyKind::InteriorHigh)) {
            let scale = low.profit.abs().max(high.profit.abs());
            if (low.profit - high.profit).abs() <= TIE_REL_TOL * scale
                && matches!(global.kind, SupplyKind::InteriorLow | SupplyKind::InteriorHigh)
            {
                tie = true;
                global = *low;
            }
        }

        let bounds = self.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l);
        let high = global.kind == SupplyKind::InteriorHigh;
        let flags = RiskFlags {
            coordination_required: high && global.in_multivalued_demand,
            criticality_margin: bounds.filter(|_| high).map(|b| b.p_hat_u - global.p_hat),
            windfall_possible: global.kind == SupplyKind::InteriorLow && global.in_multivalued_demand,
            tie,
        };
        Ok(SupplyOptimum {
            j,
            h,
            candidates,
            global,
            flags,
        })
    }

    /// Demand price, effective supply price and profit along `etas`.
    pub fn profit_curve(&self, j: f64, h: f64, etas: &[f64]) -> Result<Vec<ProfitPoint>> {
        check_inputs(j, h)?;
        etas.iter()
            .map(|&eta| {
                let p_d = h + self.d_fun(j, eta)?;
                Ok(ProfitPoint {
                    eta,
                    p_d,
                    p_s: self.effective_supply_price(j, eta)?,
                    pi: p_d * eta,
                })
            })
            .collect()
    }
}

fn check_inputs(j: f64, h: f64) -> Result<()> {
    if !j.is_finite() || j < 0.0 {
        return Err(Error::Domain { what: "j", value: j });
    }
    if !h.is_finite() {
        return Err(Error::Domain { what: "h", value: h });
    }
    Ok(())
}

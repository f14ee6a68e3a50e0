//! Customers' equilibria.
//!
//! At a shifted price `p_hat = p - h` the equilibrium fractions of buyers are
//! the roots in `(0, 1)` of `p_hat = D(j; eta) = j eta - Gamma(eta)`. For
//! `j > j_B` the function `D` has a minimum at `eta_L` and a maximum at
//! `eta_U`, and prices in `[p_hat_L, p_hat_U]` admit two stable equilibria
//! separated by an unstable one.

use alloc::vec::Vec;

use crate::distribution::Iwp;
use crate::roots::brent;
use crate::{Error, Market, Result, ETA_CLAMP};

const ETA_TOL: f64 = 1e-15;
const CUSP_REL_TOL: f64 = 1e-12;

/// Position of an equilibrium relative to the multi-valued region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Branch {
    /// Low-demand equilibrium coexisting with a high one.
    Low,
    /// High-demand (coordinated) equilibrium coexisting with a low one.
    High,
    /// The only equilibrium at this price.
    Unique,
    /// Unstable equilibrium between the two stable branches.
    Gap,
}

impl Branch {
    /// Lower-case label used in output files.
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Low => "low",
            Branch::High => "high",
            Branch::Unique => "unique",
            Branch::Gap => "gap",
        }
    }
}

/// One root of the fixed-point equation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Equilibrium {
    /// Fraction of buyers.
    pub eta: f64,
    /// `D'(j; eta) <= 0`.
    pub stable: bool,
    /// Branch label.
    pub branch: Branch,
}

/// Every equilibrium at one `(j, p_hat)`, ordered by `eta`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DemandEquilibria {
    /// Social strength.
    pub j: f64,
    /// Shifted price.
    pub p_hat: f64,
    /// Roots in increasing order.
    pub roots: Vec<Equilibrium>,
}

impl DemandEquilibria {
    /// Stable roots only.
    pub fn stable(&self) -> impl Iterator<Item = &Equilibrium> {
        self.roots.iter().filter(|r| r.stable)
    }

    /// Smallest stable fraction of buyers.
    pub fn lowest_stable(&self) -> f64 {
        self.stable().map(|r| r.eta).next().unwrap_or(self.roots[0].eta)
    }

    /// Largest stable fraction of buyers.
    pub fn highest_stable(&self) -> f64 {
        self.stable().map(|r| r.eta).last().unwrap_or(self.roots[0].eta)
    }

    /// Whether two stable equilibria coexist.
    pub fn is_multivalued(&self) -> bool {
        self.stable().count() > 1
    }
}

/// Limits of the multi-valued demand region at one `j > j_B`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BranchBoundaries {
    /// Social strength.
    pub j: f64,
    /// Minimum of `D`: upper end of the low branch.
    pub eta_l: f64,
    /// Maximum of `D`: lower end of the high branch.
    pub eta_u: f64,
    /// `D(j; eta_L)`, lowest price sustaining the low branch.
    pub p_hat_l: f64,
    /// `D(j; eta_U)`, highest price sustaining the high branch.
    pub p_hat_u: f64,
}

impl BranchBoundaries {
    /// Width `p_hat_U - p_hat_L` of the coexistence band.
    pub fn width(&self) -> f64 {
        self.p_hat_u - self.p_hat_l
    }

    /// Whether `p_hat` lies strictly inside the coexistence band.
    pub fn contains(&self, p_hat: f64) -> bool {
        p_hat > self.p_hat_l && p_hat < self.p_hat_u
    }

    /// Whether `eta` lies strictly inside the unstable gap.
    pub fn in_gap(&self, eta: f64) -> bool {
        eta > self.eta_l && eta < self.eta_u
    }
}

/// A sample of the inverse demand `p_hat = D(j; eta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct DemandPoint {
    /// Fraction of buyers.
    pub eta: f64,
    /// `D(j; eta)`.
    pub p_hat: f64,
    /// `D'(j; eta) <= 0`.
    pub stable: bool,
    /// Branch of the equilibrium at this `(eta, p_hat)`.
    pub branch: Branch,
}

impl<D: Iwp> Market<D> {
    /// Shifted inverse demand `D(j; eta) = j eta - Gamma(eta)`.
    pub fn d_fun(&self, j: f64, eta: f64) -> Result<f64> {
        Ok(j * eta - self.gamma().gamma(eta)?)
    }

    /// Slope `D'(j; eta) = j - Gamma'(eta)`.
    pub fn d_prime(&self, j: f64, eta: f64) -> Result<f64> {
        Ok(j - self.gamma().gamma_d1(eta)?)
    }

    pub(crate) fn d_clamped(&self, j: f64, eta: f64) -> f64 {
        j * eta + self.distribution().isf(eta)
    }

    /// Solutions of `Gamma'(eta) = j`, or `None` for `j < j_B`.
    ///
    /// At `j = j_B` (to a relative `1e-12`) the cusp is returned with both
    /// ends at `eta_B`.
    pub fn branch_boundaries(&self, j: f64) -> Option<BranchBoundaries> {
        let (j_b, eta_b) = (self.j_b(), self.eta_b());
        if !j.is_finite() || j < j_b * (1.0 - CUSP_REL_TOL) {
            return None;
        }
        if j <= j_b * (1.0 + CUSP_REL_TOL) {
            let p = self.p_hat_b();
            return Some(BranchBoundaries {
                j,
                eta_l: eta_b,
                eta_u: eta_b,
                p_hat_l: p,
                p_hat_u: p,
            });
        }
        let slope_gap = |eta: f64| self.gamma().jet_clamped(eta).d1 - j;
        let eta_l = brent(slope_gap, ETA_CLAMP, eta_b, ETA_TOL, "eta_L").unwrap_or(ETA_CLAMP);
        let eta_u = brent(slope_gap, eta_b, 1.0 - ETA_CLAMP, ETA_TOL, "eta_U").unwrap_or(1.0 - ETA_CLAMP);
        Some(BranchBoundaries {
            j,
            eta_l,
            eta_u,
            p_hat_l: self.d_clamped(j, eta_l),
            p_hat_u: self.d_clamped(j, eta_u),
        })
    }

    /// Every root of `p_hat = D(j; eta)` in `(0, 1)`, tagged by stability and branch.
    ///
    /// `(0, 1)` is cut at the extrema `eta_L`, `eta_U` of `D`; each monotone
    /// piece holds at most one root, found by Brent's method on the
    /// fixed-point residual `eta - (1 - F(p_hat - j eta))`.
    pub fn demand_equilibria(&self, j: f64, p_hat: f64) -> Result<DemandEquilibria> {
        if !(j >= 0.0) || !j.is_finite() {
            return Err(Error::Domain { what: "j", value: j });
        }
        if !p_hat.is_finite() {
            return Err(Error::Domain {
                what: "p_hat",
                value: p_hat,
            });
        }
        let dist = self.distribution();
        let residual = |eta: f64| eta - dist.sf(p_hat - j * eta);

        let bounds = self.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l);
        let cuts: &[f64] = match &bounds {
            Some(b) => &[0.0, b.eta_l, b.eta_u, 1.0],
            None => &[0.0, 1.0],
        };
        let mut found: Vec<(f64, usize)> = Vec::with_capacity(3);
        for (seg, w) in cuts.windows(2).enumerate() {
            let (ra, rb) = (residual(w[0]), residual(w[1]));
            let brackets = ra == 0.0 || rb == 0.0 || ra.is_sign_negative() != rb.is_sign_negative();
            if !brackets {
                continue;
            }
            let eta =
                brent(residual, w[0], w[1], ETA_TOL, "demand equilibrium")?.clamp(ETA_CLAMP, 1.0 - ETA_CLAMP);
            if found.iter().all(|&(e, _)| (e - eta).abs() > 1e-12) {
                found.push((eta, seg));
            }
        }

        let multi = found.len() > 1;
        let roots = found
            .into_iter()
            .map(|(eta, seg)| {
                let middle = bounds.is_some() && seg == 1;
                let branch = match (multi, bounds.is_some(), seg) {
                    (false, _, _) => Branch::Unique,
                    (true, true, 0) => Branch::Low,
                    (true, true, 1) => Branch::Gap,
                    _ => Branch::High,
                };
                Equilibrium {
                    eta,
                    stable: !middle,
                    branch,
                }
            })
            .collect();
        Ok(DemandEquilibria { j, p_hat, roots })
    }

    /// Samples `D(j; eta)` on `etas`, labelling each point as an equilibrium.
    pub fn demand_curve(&self, j: f64, etas: &[f64]) -> Result<Vec<DemandPoint>> {
        let bounds = self.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l);
        etas.iter()
            .map(|&eta| {
                let p_hat = self.d_fun(j, eta)?;
                let stable = self.d_prime(j, eta)? <= 0.0;
                let branch = match bounds {
                    Some(b) if p_hat >= b.p_hat_l && p_hat <= b.p_hat_u => {
                        if eta <= b.eta_l {
                            Branch::Low
                        } else if eta >= b.eta_u {
                            Branch::High
                        } else {
                            Branch::Gap
                        }
                    }
                    _ => Branch::Unique,
                };
                Ok(DemandPoint {
                    eta,
                    p_hat,
                    stable,
                    branch,
                })
            })
            .collect()
    }
}

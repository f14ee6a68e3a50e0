//! Leading-order expansions of the high-branch profit maximum near the
//! supply point `B` and just above the null-price line.
//!
//! Near `B` the fraction of buyers grows like a square root of the distance
//! to `B` while price and profit grow linearly. Above the null-price line
//! everything is linear in `h - h_0(j)`.

use alloc::vec::Vec;

use crate::distribution::Iwp;
use crate::supply::SupplyKind;
use crate::{Error, Market, Result};

/// Largest `epsilon` for which an expansion is flagged valid.
pub const VALIDITY_LIMIT: f64 = 0.1;

/// Which expansion.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum Regime {
    /// `j = j_B`, `h = h_B + epsilon`.
    FixedJVaryH,
    /// `h = h_B`, `j = j_B + epsilon`.
    FixedHVaryJ,
    /// `j` fixed above `j_B`, `h = h_0(j) + epsilon`.
    NullPriceLine {
        /// Social strength.
        j: f64,
    },
}

impl Regime {
    /// Label used in output files.
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::FixedJVaryH => "fixed_j",
            Regime::FixedHVaryJ => "fixed_h",
            Regime::NullPriceLine { .. } => "null_price",
        }
    }
}

/// Predicted high-branch optimum.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ExpansionResult {
    /// Expansion used.
    pub regime: Regime,
    /// Distance to the critical point.
    pub epsilon: f64,
    /// Predicted price.
    pub price: f64,
    /// Predicted fraction of buyers.
    pub eta: f64,
    /// Predicted profit.
    pub profit: f64,
    /// Coefficient of the leading correction to `eta`.
    pub coefficient: f64,
    /// `epsilon <= VALIDITY_LIMIT`.
    pub valid: bool,
}

/// One line of a convergence table for `eta`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct ConvergenceRow {
    /// Distance to the critical point.
    pub epsilon: f64,
    /// Expansion value.
    pub predicted: f64,
    /// Exact solver value.
    pub exact: f64,
    /// `|predicted - exact|`.
    pub abs_error: f64,
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain {
            what: "epsilon",
            value: epsilon,
        });
    }
    Ok(())
}

impl<D: Iwp> Market<D> {
    fn cusp_third_derivative(&self) -> Result<f64> {
        let g3 = self.gamma().gamma_d3(self.eta_b())?;
        if !(g3 > 0.0) {
            return Err(Error::Domain {
                what: "Gamma'''(eta_B)",
                value: g3,
            });
        }
        Ok(g3)
    }

    /// Expansion at `j = j_B`, `h = h_B + epsilon`.
    pub fn near_b_fixed_j(&self, epsilon: f64) -> Result<ExpansionResult> {
        check_epsilon(epsilon)?;
        let eta_b = self.eta_b();
        let c = libm::sqrt(2.0 / (eta_b * self.cusp_third_derivative()?));
        let root = libm::sqrt(epsilon);
        Ok(ExpansionResult {
            regime: Regime::FixedJVaryH,
            epsilon,
            price: epsilon,
            eta: eta_b + c * root,
            profit: eta_b * epsilon + c * epsilon * root,
            coefficient: c,
            valid: epsilon <= VALIDITY_LIMIT,
        })
    }

    /// Expansion at `h = h_B`, `j = j_B + epsilon`.
    pub fn near_b_fixed_h(&self, epsilon: f64) -> Result<ExpansionResult> {
        check_epsilon(epsilon)?;
        let eta_b = self.eta_b();
        let c = 2.0 / libm::sqrt(self.cusp_third_derivative()?);
        let root = libm::sqrt(epsilon);
        let price = eta_b * epsilon;
        let eta = eta_b + c * root;
        Ok(ExpansionResult {
            regime: Regime::FixedHVaryJ,
            epsilon,
            price,
            eta,
            profit: eta_b * eta_b * epsilon + eta_b * c * epsilon * root,
            coefficient: c,
            valid: epsilon <= VALIDITY_LIMIT,
        })
    }

    /// Expansion at fixed `j > j_B`, `h = h_0(j) + epsilon`.
    pub fn near_null_price(&self, j: f64, epsilon: f64) -> Result<ExpansionResult> {
        check_epsilon(epsilon)?;
        let b = self
            .branch_boundaries(j)
            .filter(|b| b.eta_u > b.eta_l)
            .ok_or(Error::Domain {
                what: "j <= j_B for null-price expansion",
                value: j,
            })?;
        let eta0 = b.eta_u;
        let curvature = eta0 * self.gamma().gamma_d2(eta0)?;
        if !(curvature > 0.0) {
            return Err(Error::Domain {
                what: "eta_U Gamma''(eta_U)",
                value: curvature,
            });
        }
        let c = 1.0 / curvature;
        Ok(ExpansionResult {
            regime: Regime::NullPriceLine { j },
            epsilon,
            price: epsilon,
            eta: eta0 + c * epsilon,
            profit: eta0 * epsilon + c * epsilon * epsilon,
            coefficient: c,
            valid: epsilon <= VALIDITY_LIMIT,
        })
    }

    /// Expansion for `regime` at `epsilon`.
    pub fn expansion(&self, regime: Regime, epsilon: f64) -> Result<ExpansionResult> {
        match regime {
            Regime::FixedJVaryH => self.near_b_fixed_j(epsilon),
            Regime::FixedHVaryJ => self.near_b_fixed_h(epsilon),
            Regime::NullPriceLine { j } => self.near_null_price(j, epsilon),
        }
    }

    /// `(j, h)` at which `regime` is evaluated for `epsilon`.
    pub fn expansion_point(&self, regime: Regime, epsilon: f64) -> Result<(f64, f64)> {
        let (j_b, h_b) = (self.j_b(), -self.p_hat_b());
        Ok(match regime {
            Regime::FixedJVaryH => (j_b, h_b + epsilon),
            Regime::FixedHVaryJ => (j_b + epsilon, h_b),
            Regime::NullPriceLine { j } => {
                let h0 = self.null_price_line(j).ok_or(Error::Domain {
                    what: "j <= j_B for null-price expansion",
                    value: j,
                })?;
                (j, h0 + epsilon)
            }
        })
    }

    /// Exact high-branch maximum `(price, eta, profit)` the expansion approximates.
    pub fn expansion_exact(&self, regime: Regime, epsilon: f64) -> Result<(f64, f64, f64)> {
        let (j, h) = self.expansion_point(regime, epsilon)?;
        let c = self
            .interior_extrema(j, h)?
            .into_iter()
            .find(|c| c.kind == SupplyKind::InteriorHigh)
            .ok_or(Error::NoBracket {
                what: "high-branch maximum",
            })?;
        Ok((c.price, c.eta, c.profit))
    }

    /// Predicted versus exact `eta` over `epsilons`.
    pub fn convergence_table(&self, regime: Regime, epsilons: &[f64]) -> Result<Vec<ConvergenceRow>> {
        epsilons
            .iter()
            .map(|&epsilon| {
                let predicted = self.expansion(regime, epsilon)?.eta;
                let exact = self.expansion_exact(regime, epsilon)?.1;
                Ok(ConvergenceRow {
                    epsilon,
                    predicted,
                    exact,
                    abs_error: (predicted - exact).abs(),
                })
            })
            .collect()
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (libm::log(x), libm::log(y));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

use alloc::vec::Vec;

use super::{MarketState, TrajectoryPoint, INTRO_DELTA};
use crate::demand::BranchBoundaries;
use crate::distribution::Iwp;
use crate::supply::{SupplyCandidate, SupplyKind, SupplyOptimum};
use crate::{Market, Result};

const RAMP_STEPS: usize = 200;

/// How a policy run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(tag = "verdict", rename_all = "snake_case"))]
pub enum Verdict {
    /// The high-branch optimum was reached.
    Success,
    /// Demand stayed on the low branch down to zero price.
    Trapped,
    /// The policy cannot be implemented.
    Infeasible {
        /// Why.
        reason: &'static str,
    },
    /// No coordination problem: the optimum was posted directly.
    NotNeeded,
}

/// Initial demand for a tatonnement run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Start {
    /// Coordination failed: customers sit on the low branch.
    Low,
    /// Customers already coordinate on the high branch.
    High,
}

/// A coordination-free price and its guaranteed outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Fallback {
    /// Price net of cost.
    pub price: f64,
    /// Fraction of buyers that is guaranteed at that price.
    pub eta: f64,
    /// Guaranteed profit.
    pub profit: f64,
}

/// Which fallback a minimax-regret run picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FallbackChoice {
    /// The low-branch interior maximum.
    LowBranch,
    /// Just below the end of the low branch, where only the high root exists.
    BelowBoundary,
    /// No coordination risk: the global optimum itself.
    Optimum,
}

/// Both fallbacks of the least-regret rule.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MinimaxRegret {
    /// Low-branch interior maximum, when it exists and is viable.
    pub low_branch: Option<Fallback>,
    /// Price `h + p_hat_L - delta`, admissible when it is positive.
    pub below_boundary: Option<Fallback>,
    /// Selected fallback.
    pub choice: FallbackChoice,
    /// Global profit minus the selected guaranteed profit.
    pub regret: f64,
}

/// Result of a policy run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PolicyOutcome {
    /// Policy name.
    pub policy: &'static str,
    /// Social strength.
    pub j: f64,
    /// Mean willingness to pay net of cost.
    pub h: f64,
    /// How the run ended.
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub verdict: Verdict,
    /// Global optimum of the pricing program.
    pub target: SupplyCandidate,
    /// Introductory price `h + p_hat_L` when `j > j_B`.
    pub intro_price: Option<f64>,
    /// Final posted price.
    pub final_price: f64,
    /// Final fraction of buyers.
    pub final_eta: f64,
    /// Final profit.
    pub final_profit: f64,
    /// Fallback comparison of a minimax-regret run.
    pub minimax: Option<MinimaxRegret>,
    /// Every posted period.
    pub trajectory: Vec<TrajectoryPoint>,
}

fn high_side(bounds: &BranchBoundaries, eta: f64) -> bool {
    eta >= bounds.eta_u
}

impl<D: Iwp> Market<D> {
    fn outcome(
        &self,
        policy: &'static str,
        opt: &SupplyOptimum,
        verdict: Verdict,
        state: MarketState<'_, D>,
        minimax: Option<MinimaxRegret>,
    ) -> PolicyOutcome {
        let last = state.last().copied();
        let intro_price = state.bounds.map(|b| opt.h + b.p_hat_l);
        PolicyOutcome {
            policy,
            j: opt.j,
            h: opt.h,
            verdict,
            target: opt.global,
            intro_price,
            final_price: last.map_or(f64::NAN, |p| p.price),
            final_eta: last.map_or(f64::NAN, |p| p.eta),
            final_profit: last.map_or(f64::NAN, |p| p.profit),
            minimax,
            trajectory: state.into_history(),
        }
    }

    fn direct(&self, policy: &'static str, opt: &SupplyOptimum, eta0: f64) -> Result<PolicyOutcome> {
        let mut state = self.market_state(opt.j, opt.h, eta0);
        state.post(opt.global.price)?;
        Ok(self.outcome(policy, opt, Verdict::NotNeeded, state, None))
    }

    /// Introductory pricing: post just below `h + p_hat_L` to a market with
    /// no buyers, then ramp up to the high-branch optimum.
    pub fn run_introductory(&self, j: f64, h: f64) -> Result<PolicyOutcome> {
        const NAME: &str = "introductory";
        let opt = self.optimize(j, h)?;
        let bounds = match self.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l) {
            Some(b) if opt.flags.coordination_required => b,
            _ => return self.direct(NAME, &opt, 0.0),
        };
        let intro = h + bounds.p_hat_l - INTRO_DELTA;
        let mut state = self.market_state(j, h, 0.0);
        if !(intro > 0.0) {
            state.post(opt.global.price)?;
            let verdict = Verdict::Infeasible {
                reason: "introductory price would be below cost",
            };
            return Ok(self.outcome(NAME, &opt, verdict, state, None));
        }
        state.post(intro)?;
        state.ramp(intro, opt.global.price, RAMP_STEPS)?;
        let verdict = if high_side(&bounds, state.eta()) {
            Verdict::Success
        } else {
            Verdict::Trapped
        };
        Ok(self.outcome(NAME, &opt, verdict, state, None))
    }

    /// Tatonnement: from the optimal price with demand on the `start` branch,
    /// lower the price by `step` until demand jumps to the high branch, then
    /// raise it back to the optimum.
    pub fn run_tatonnement(&self, j: f64, h: f64, start: Start, step: f64) -> Result<PolicyOutcome> {
        const NAME: &str = "tatonnement";
        let opt = self.optimize(j, h)?;
        let eta0 = match start {
            Start::Low => 0.0,
            Start::High => 1.0,
        };
        let bounds = match self.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l) {
            Some(b) if opt.global.kind == SupplyKind::InteriorHigh => b,
            _ => return self.direct(NAME, &opt, eta0),
        };
        let step = if step > 0.0 { step } else { 1e-3 };
        let target = opt.global.price;
        let mut state = self.market_state(j, h, eta0);
        let mut price = target;
        state.post(price)?;
        while !high_side(&bounds, state.eta()) {
            if price <= 0.0 {
                return Ok(self.outcome(NAME, &opt, Verdict::Trapped, state, None));
            }
            price = (price - step).max(0.0);
            state.post(price)?;
        }
        if price < target {
            let steps = libm::ceil((target - price) / step) as usize;
            state.ramp(price, target, steps)?;
        }
        Ok(self.outcome(NAME, &opt, Verdict::Success, state, None))
    }

    /// Least-regret rule: compare the guaranteed profits of the low-branch
    /// maximum and of the price just below the end of the low branch.
    pub fn run_minimax_regret(&self, j: f64, h: f64) -> Result<PolicyOutcome> {
        const NAME: &str = "minimax_regret";
        let opt = self.optimize(j, h)?;
        let bounds = match self.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l) {
            Some(b) if opt.flags.coordination_required => b,
            _ => {
                let mut out = self.direct(NAME, &opt, 0.0)?;
                let optimum = Fallback {
                    price: opt.global.price,
                    eta: opt.global.eta,
                    profit: opt.global.profit,
                };
                let (low_branch, below_boundary) = match opt.global.kind {
                    SupplyKind::InteriorLow => (Some(optimum), None),
                    _ => (None, None),
                };
                out.minimax = Some(MinimaxRegret {
                    low_branch,
                    below_boundary,
                    choice: FallbackChoice::Optimum,
                    regret: 0.0,
                });
                return Ok(out);
            }
        };
        let low_branch = opt
            .candidates
            .iter()
            .find(|c| c.viable && c.kind == SupplyKind::InteriorLow)
            .map(|c| Fallback {
                price: c.price,
                eta: c.eta,
                profit: c.profit,
            });
        let below_boundary = if h + bounds.p_hat_l > 0.0 {
            let price = h + bounds.p_hat_l - INTRO_DELTA;
            let eq = self.demand_equilibria(j, price - h)?;
            let eta = eq.lowest_stable();
            Some(Fallback {
                price,
                eta,
                profit: price * eta,
            })
        } else {
            None
        };
        let (choice, chosen) = match (low_branch, below_boundary) {
            (Some(l), Some(b)) if b.profit > l.profit => (FallbackChoice::BelowBoundary, b),
            (Some(l), _) => (FallbackChoice::LowBranch, l),
            (None, Some(b)) => (FallbackChoice::BelowBoundary, b),
            (None, None) => {
                let state = self.market_state(j, h, 0.0);
                let verdict = Verdict::Infeasible {
                    reason: "no coordination-free price is viable",
                };
                let mut out = self.outcome(NAME, &opt, verdict, state, None);
                out.minimax = Some(MinimaxRegret {
                    low_branch,
                    below_boundary,
                    choice: FallbackChoice::Optimum,
                    regret: f64::NAN,
                });
                return Ok(out);
            }
        };
        let mut state = self.market_state(j, h, 0.0);
        state.post(chosen.price)?;
        let minimax = MinimaxRegret {
            low_branch,
            below_boundary,
            choice,
            regret: opt.global.profit - chosen.profit,
        };
        Ok(self.outcome(NAME, &opt, Verdict::Success, state, Some(minimax)))
    }
}

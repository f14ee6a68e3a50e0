//! Dynamic market runs: best-response demand dynamics, price sweeps and the
//! pricing policies a monopolist can use against coordination failure.
//!
//! Customers react to a posted price by synchronous best response: everybody
//! buys iff their surplus at the previous fraction of buyers is non-negative.
//! In the mean-field limit this is the iteration `eta <- 1 - F(p_hat - j eta)`,
//! which converges to a stable equilibrium chosen by the initial condition.

use alloc::vec::Vec;

use crate::demand::{Branch, BranchBoundaries};
use crate::distribution::Iwp;
use crate::{Error, Market, Result};

mod policy;
mod population;

pub use policy::{Fallback, FallbackChoice, MinimaxRegret, PolicyOutcome, Start, Verdict};
pub use population::{AgentPopulation, PopulationSettle};

/// Stopping threshold on `|delta eta|` for the mean-field iteration.
pub const MEAN_FIELD_TOL: f64 = 1e-12;
/// Default iteration cap of [`Market::mean_field_iterate`] inside runs.
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;
/// Default number of steps of a sweep in one direction.
pub const DEFAULT_SWEEP_STEPS: usize = 2000;
/// Offset below the introductory price `h + p_hat_L`.
pub const INTRO_DELTA: f64 = 1e-6;

/// Outcome of the mean-field iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct MeanField {
    /// Final fraction of buyers.
    pub eta: f64,
    /// Iterations performed.
    pub steps: usize,
    /// `|delta eta| < MEAN_FIELD_TOL` was reached.
    pub converged: bool,
}

/// One recorded period of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TrajectoryPoint {
    /// Period index.
    pub t: usize,
    /// Posted price net of cost.
    pub price: f64,
    /// Fraction of buyers after settling.
    pub eta: f64,
    /// Profit `price * eta`.
    pub profit: f64,
    /// Branch of the settled equilibrium.
    pub branch: Branch,
}

/// A jump of the demand across the unstable gap.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct JumpEvent {
    /// Period at which the new branch was reached.
    pub t: usize,
    /// Shifted price posted in that period.
    pub p_hat: f64,
    /// Fraction of buyers before.
    pub eta_before: f64,
    /// Fraction of buyers after.
    pub eta_after: f64,
}

/// A market run with history: current price, demand and recorded periods.
#[derive(Debug, Clone)]
pub struct MarketState<'m, D> {
    market: &'m Market<D>,
    j: f64,
    h: f64,
    bounds: Option<BranchBoundaries>,
    eta: f64,
    p_hat: f64,
    history: Vec<TrajectoryPoint>,
    jumps: Vec<JumpEvent>,
    max_steps: usize,
}

impl<D: Iwp> Market<D> {
    /// Iterates `eta <- 1 - F(p_hat - j eta)` from `eta0`.
    pub fn mean_field_iterate(&self, j: f64, p_hat: f64, eta0: f64, max_steps: usize) -> Result<MeanField> {
        if !(0.0..=1.0).contains(&eta0) {
            return Err(Error::Domain {
                what: "eta0",
                value: eta0,
            });
        }
        if !j.is_finite() || !p_hat.is_finite() {
            return Err(Error::Domain {
                what: "j or p_hat",
                value: if j.is_finite() { p_hat } else { j },
            });
        }
        let dist = self.distribution();
        let mut eta = eta0;
        for steps in 1..=max_steps {
            let next = dist.sf(p_hat - j * eta);
            let delta = (next - eta).abs();
            eta = next;
            if delta < MEAN_FIELD_TOL {
                return Ok(MeanField {
                    eta,
                    steps,
                    converged: true,
                });
            }
        }
        Ok(MeanField {
            eta,
            steps: max_steps,
            converged: false,
        })
    }

    /// Starts a run at `(j, h)` with `eta0` buyers and no price posted yet.
    pub fn market_state(&self, j: f64, h: f64, eta0: f64) -> MarketState<'_, D> {
        MarketState {
            market: self,
            j,
            h,
            bounds: self.branch_boundaries(j).filter(|b| b.eta_u > b.eta_l),
            eta: eta0.clamp(0.0, 1.0),
            p_hat: f64::NAN,
            history: Vec::new(),
            jumps: Vec::new(),
            max_steps: DEFAULT_MAX_STEPS,
        }
    }

    /// Sweeps the price linearly from `p_start` to `p_end` in `steps` steps,
    /// letting demand follow its branch from `eta0`.
    pub fn sweep_price(
        &self,
        j: f64,
        h: f64,
        p_start: f64,
        p_end: f64,
        steps: usize,
        eta0: f64,
    ) -> Result<MarketState<'_, D>> {
        let mut state = self.market_state(j, h, eta0);
        state.ramp(p_start, p_end, steps)?;
        Ok(state)
    }

    /// Up-sweep of `p_hat` over `[p_hat_lo, p_hat_hi]` starting on the high
    /// branch, followed by the down-sweep continuing from its final state.
    pub fn hysteresis_loop(
        &self,
        j: f64,
        h: f64,
        p_hat_lo: f64,
        p_hat_hi: f64,
        steps: usize,
    ) -> Result<(MarketState<'_, D>, MarketState<'_, D>)> {
        let up = self.sweep_price(j, h, h + p_hat_lo, h + p_hat_hi, steps, 1.0)?;
        let down = self.sweep_price(j, h, h + p_hat_hi, h + p_hat_lo, steps, up.eta())?;
        Ok((up, down))
    }
}

impl<'m, D: Iwp> MarketState<'m, D> {
    /// Current fraction of buyers.
    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Last posted shifted price.
    pub fn p_hat(&self) -> f64 {
        self.p_hat
    }

    /// Recorded periods.
    pub fn history(&self) -> &[TrajectoryPoint] {
        &self.history
    }

    /// Detected jumps across the unstable gap.
    pub fn jumps(&self) -> &[JumpEvent] {
        &self.jumps
    }

    /// Consumes the state, returning its history.
    pub fn into_history(self) -> Vec<TrajectoryPoint> {
        self.history
    }

    /// Last recorded period.
    pub fn last(&self) -> Option<&TrajectoryPoint> {
        self.history.last()
    }

    /// Branch of the current state.
    pub fn branch(&self) -> Branch {
        classify(self.bounds.as_ref(), self.p_hat, self.eta)
    }

    fn side(&self, eta: f64) -> Option<bool> {
        self.bounds.map(|b| eta >= b.eta_u)
    }

    /// Posts `price` and lets the demand settle from the current fraction.
    pub fn post(&mut self, price: f64) -> Result<&TrajectoryPoint> {
        let p_hat = price - self.h;
        let settled = self
            .market
            .mean_field_iterate(self.j, p_hat, self.eta, self.max_steps)?;
        if !settled.converged {
            return Err(Error::NoConvergence {
                what: "mean-field demand",
                iterations: settled.steps,
            });
        }
        let t = self.history.len();
        if let (Some(before), Some(after)) = (self.side(self.eta), self.side(settled.eta)) {
            if before != after && !self.history.is_empty() {
                self.jumps.push(JumpEvent {
                    t,
                    p_hat,
                    eta_before: self.eta,
                    eta_after: settled.eta,
                });
            }
        }
        self.eta = settled.eta;
        self.p_hat = p_hat;
        self.history.push(TrajectoryPoint {
            t,
            price,
            eta: settled.eta,
            profit: price * settled.eta,
            branch: classify(self.bounds.as_ref(), p_hat, settled.eta),
        });
        Ok(self.history.last().unwrap())
    }

    /// Posts `steps + 1` prices evenly spaced from `from` to `to`.
    pub fn ramp(&mut self, from: f64, to: f64, steps: usize) -> Result<()> {
        let steps = steps.max(1);
        for k in 0..=steps {
            let price = from + (to - from) * (k as f64 / steps as f64);
            self.post(price)?;
        }
        Ok(())
    }
}

fn classify(bounds: Option<&BranchBoundaries>, p_hat: f64, eta: f64) -> Branch {
    match bounds {
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
    }
}

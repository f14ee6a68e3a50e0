use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::distribution::Iwp;

/// A finite population of customers with quenched idiosyncratic draws.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentPopulation {
    // sorted ascending so that counting buyers is a binary search
    draws: Vec<f64>,
    seed: u64,
}

/// Outcome of iterating the finite-population best response.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PopulationSettle {
    /// Final fraction of buyers.
    pub eta: f64,
    /// Synchronous rounds performed.
    pub steps: usize,
    /// A fixed point was reached.
    pub converged: bool,
}

impl AgentPopulation {
    /// Draws `n` idiosyncratic values from `dist` with a ChaCha8 stream seeded by `seed`.
    pub fn sample<D: Iwp>(dist: &D, n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draws: Vec<f64> = (0..n)
            .map(|_| {
                let u = ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
                dist.quantile(u)
            })
            .collect();
        draws.sort_by(f64::total_cmp);
        AgentPopulation { draws, seed }
    }

    /// Population size.
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    /// Whether the population is empty.
    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Seed the draws came from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Draws in ascending order.
    pub fn draws(&self) -> &[f64] {
        &self.draws
    }

    /// Sample mean and (population) variance of the draws.
    pub fn moments(&self) -> (f64, f64) {
        let n = self.draws.len() as f64;
        let mean = self.draws.iter().sum::<f64>() / n;
        let var = self.draws.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        (mean, var)
    }

    /// Fraction of agents whose surplus `x_i + j eta - p_hat` is non-negative.
    pub fn best_response_step(&self, j: f64, p_hat: f64, eta: f64) -> f64 {
        if self.draws.is_empty() {
            return 0.0;
        }
        let threshold = p_hat - j * eta;
        let below = self.draws.partition_point(|&x| x < threshold);
        (self.draws.len() - below) as f64 / self.draws.len() as f64
    }

    /// Synchronous best response from `eta0` until the fraction stops changing.
    pub fn settle(&self, j: f64, p_hat: f64, eta0: f64, max_steps: usize) -> PopulationSettle {
        let mut eta = eta0;
        for steps in 1..=max_steps {
            let next = self.best_response_step(j, p_hat, eta);
            if next == eta {
                return PopulationSettle {
                    eta,
                    steps,
                    converged: true,
                };
            }
            eta = next;
        }
        PopulationSettle {
            eta,
            steps: max_steps,
            converged: false,
        }
    }
}

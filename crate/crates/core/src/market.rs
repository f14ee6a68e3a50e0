use crate::distribution::{CriticalScalars, GammaFunctions, Iwp};
use crate::roots::{brent, scan_sign_change};
use crate::{Error, Result, ETA_CLAMP};

/// Apex of the supply coexistence region, where `Gamma~'` is minimal.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SupplyApex {
    /// `argmin Gamma~'`.
    pub eta_a: f64,
    /// `Gamma~'(eta_A) / 2`.
    pub j_a: f64,
    /// `Gamma~(eta_A) - eta_A Gamma~'(eta_A)`.
    pub h_a: f64,
}

/// A customer population: its willingness-to-pay law with the cusp of the
/// demand problem and the apex of the supply problem precomputed.
///
/// Every solver in the crate is a method on this type. It is immutable and
/// `Sync` whenever the distribution is.
#[derive(Debug, Clone)]
pub struct Market<D> {
    gamma: GammaFunctions<D>,
    apex: SupplyApex,
}

impl<D: Iwp> Market<D> {
    /// Builds the model, locating the density mode and the supply apex.
    pub fn new(dist: D) -> Result<Self> {
        let gamma = GammaFunctions::new(dist)?;
        let apex = locate_apex(&gamma)?;
        Ok(Market { gamma, apex })
    }

    /// The `Gamma` family of the population.
    pub fn gamma(&self) -> &GammaFunctions<D> {
        &self.gamma
    }

    /// The willingness-to-pay law.
    pub fn distribution(&self) -> &D {
        self.gamma.distribution()
    }

    /// Cached `f_B`, `eta_B`, `j_B`.
    pub fn critical_scalars(&self) -> CriticalScalars {
        self.gamma.critical_scalars()
    }

    /// Critical social strength of the demand, `j_B = 1 / max f`.
    pub fn j_b(&self) -> f64 {
        self.gamma.critical_scalars().j_b
    }

    /// Fraction of buyers at the demand cusp.
    pub fn eta_b(&self) -> f64 {
        self.gamma.critical_scalars().eta_b
    }

    /// Shifted price at the demand cusp, `D(j_B; eta_B)`.
    pub fn p_hat_b(&self) -> f64 {
        let c = self.gamma.critical_scalars();
        c.j_b * c.eta_b + c.x_mode
    }

    /// Supply apex `A`.
    pub fn apex(&self) -> SupplyApex {
        self.apex
    }
}

fn locate_apex<D: Iwp>(gamma: &GammaFunctions<D>) -> Result<SupplyApex> {
    const WHAT: &str = "minimum of Gamma~'";
    let curvature = |eta: f64| gamma.jet_clamped(eta).tilde_d2();
    let mut grid = [0.0; 257];
    grid[0] = ETA_CLAMP;
    for (k, g) in grid.iter_mut().enumerate().skip(1) {
        *g = (k as f64 / 256.0).min(1.0 - ETA_CLAMP);
    }
    let slope = grid.map(|eta| gamma.jet_clamped(eta).tilde_d1());
    let k = (0..grid.len())
        .filter(|&k| slope[k].is_finite())
        .min_by(|&x, &y| slope[x].total_cmp(&slope[y]))
        .ok_or(Error::NoBracket { what: WHAT })?;
    let window = &grid[k.saturating_sub(1)..(k + 2).min(grid.len())];
    let (a, b) = scan_sign_change(curvature, window).unwrap_or((grid[k], grid[k]));
    let eta_a = if a == b {
        a
    } else {
        brent(curvature, a, b, 1e-15, WHAT)?
    };
    let jet = gamma.jet_clamped(eta_a);
    Ok(SupplyApex {
        eta_a,
        j_a: 0.5 * jet.tilde_d1(),
        h_a: jet.tilde() - eta_a * jet.tilde_d1(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::{Gaussian, Logistic};

    // Golden-section search on Gamma~' values only.
    fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let r = 0.5 * (libm::sqrt(5.0) - 1.0);
        while b - a > 1e-12 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn logistic_apex_closed_form() {
        let m = Market::new(Logistic).unwrap();
        let a = m.apex();
        let beta = Logistic::BETA;
        assert!((a.eta_a - 1.0 / 3.0).abs() < 1e-12);
        let j_a = 27.0 * libm::sqrt(3.0) / (8.0 * core::f64::consts::PI);
        assert!((a.j_a - j_a).abs() < 1e-12);
        assert!((2.0 * a.j_a - 27.0 / (4.0 * beta)).abs() < 1e-12);
        assert!((a.h_a + 0.80).abs() < 0.005);
        let g = m.gamma();
        let numeric = golden_min(|e| g.gamma_tilde_d1(e).unwrap(), 0.01, 0.99);
        assert!((numeric - a.eta_a).abs() < 1e-5);
        assert!((0.5 * g.gamma_tilde_d1(numeric).unwrap() - a.j_a).abs() < 1e-8);
    }

    #[test]
    fn apex_precedes_cusp() {
        for m in [
            Market::new(crate::Distribution::Logistic(Logistic)).unwrap(),
            Market::new(crate::Distribution::Gaussian(Gaussian)).unwrap(),
        ] {
            assert!(m.apex().eta_a <= m.eta_b());
            assert!(m.apex().j_a <= m.j_b());
        }
    }

    #[test]
    fn cusp_price() {
        let m = Market::new(Logistic).unwrap();
        assert!((m.p_hat_b() - m.j_b() / 2.0).abs() < 1e-14);
        assert!((m.p_hat_b() - 1.10).abs() < 0.005);
    }
}

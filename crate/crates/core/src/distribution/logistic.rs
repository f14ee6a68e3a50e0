use super::Iwp;

/// Logistic law rescaled to unit variance.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Logistic;

impl Logistic {
    /// Slope `pi / sqrt(3)` giving unit variance.
    pub const BETA: f64 = core::f64::consts::PI / 1.732_050_807_568_877_2;
}

const BETA: f64 = Logistic::BETA;

impl Iwp for Logistic {
    fn pdf(&self, x: f64) -> f64 {
        let e = libm::exp(-BETA * x.abs());
        BETA * e / ((1.0 + e) * (1.0 + e))
    }

    fn pdf_prime(&self, x: f64) -> f64 {
        BETA * self.pdf(x) * (self.sf(x) - self.cdf(x))
    }

    fn pdf_second(&self, x: f64) -> f64 {
        let f = self.pdf(x);
        let skew = self.sf(x) - self.cdf(x);
        BETA * BETA * f * (skew * skew - 2.0 * self.cdf(x) * self.sf(x))
    }

    fn cdf(&self, x: f64) -> f64 {
        let e = libm::exp(-BETA * x.abs());
        if x >= 0.0 {
            1.0 / (1.0 + e)
        } else {
            e / (1.0 + e)
        }
    }

    fn sf(&self, x: f64) -> f64 {
        self.cdf(-x)
    }

    fn quantile(&self, q: f64) -> f64 {
        (libm::log(q) - libm::log1p(-q)) / BETA
    }

    fn isf(&self, q: f64) -> f64 {
        -self.quantile(q)
    }
}

use super::Iwp;

/// Standard normal law.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Gaussian;

const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

impl Iwp for Gaussian {
    fn pdf(&self, x: f64) -> f64 {
        FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x)
    }

    fn pdf_prime(&self, x: f64) -> f64 {
        -x * self.pdf(x)
    }

    fn pdf_second(&self, x: f64) -> f64 {
        (x * x - 1.0) * self.pdf(x)
    }

    fn cdf(&self, x: f64) -> f64 {
        0.5 * libm::erfc(-x * core::f64::consts::FRAC_1_SQRT_2)
    }

    fn sf(&self, x: f64) -> f64 {
        0.5 * libm::erfc(x * core::f64::consts::FRAC_1_SQRT_2)
    }

    fn quantile(&self, q: f64) -> f64 {
        if q > 0.5 {
            -lower_quantile(1.0 - q)
        } else {
            lower_quantile(q)
        }
    }

    fn isf(&self, q: f64) -> f64 {
        -self.quantile(q)
    }
}

/// Quantile for `q <= 0.5`: rational approximation polished by two Newton steps.
fn lower_quantile(q: f64) -> f64 {
    if q <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut x = rational_quantile(q);
    for _ in 0..2 {
        let cdf = 0.5 * libm::erfc(-x * core::f64::consts::FRAC_1_SQRT_2);
        let pdf = FRAC_1_SQRT_2PI * libm::exp(-0.5 * x * x);
        if pdf == 0.0 {
            break;
        }
        x -= (cdf - q) / pdf;
    }
    x
}

// Acklam's rational approximation, relative error below 1.2e-9.
fn rational_quantile(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if q < P_LOW {
        let t = libm::sqrt(-2.0 * libm::log(q));
        (((((C[0] * t + C[1]) * t + C[2]) * t + C[3]) * t + C[4]) * t + C[5])
            / ((((D[0] * t + D[1]) * t + D[2]) * t + D[3]) * t + 1.0)
    } else {
        let u = q - 0.5;
        let r = u * u;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * u
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_quantiles() {
        let g = Gaussian;
        assert!((g.quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-14);
        assert!((g.quantile(1e-10) + 6.361_340_902_404_056).abs() < 1e-12);
        assert_eq!(g.quantile(0.5), 0.0);
    }

    #[test]
    fn tail_round_trip_is_relative() {
        let g = Gaussian;
        for &q in &[1e-12, 1e-8, 1e-4, 0.1] {
            let x = g.isf(q);
            assert!((g.sf(x) / q - 1.0).abs() < 1e-13, "q = {q}");
        }
    }
}

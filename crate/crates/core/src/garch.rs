//! GARCH(1,1) conditional variance with chi-square interval bounds.
//!
//! The shock term is written on the standardized innovation:
//!
//! ```text
//! sigma_t^2 = omega + alpha1 * eps_{t-1}^2 * sigma_{t-1}^2 + beta1 * sigma_{t-1}^2
//! ```
//!
//! Because `eps^2 ~ chi2(1)`, replacing `eps^2` by the lower and upper
//! chi-square quantiles at a confidence level gives an interval for the next
//! conditional variance.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::special;

/// Smallest admissible `omega` after optimizer projection.
pub const OMEGA_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha1: f64,
    pub beta1: f64,
}

impl GarchParams {
    pub fn new(omega: f64, alpha1: f64, beta1: f64) -> Result<Self> {
        let p = Self {
            omega,
            alpha1,
            beta1,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.alpha1.is_finite() && self.beta1.is_finite()) {
            return Err(Error::NonFinite("garch parameters"));
        }
        if !(self.omega > 0.0 && self.alpha1 >= 0.0 && self.beta1 >= 0.0) {
            return Err(Error::invalid(format!(
                "garch parameters need omega > 0, alpha1 >= 0, beta1 >= 0; got {self:?}"
            )));
        }
        Ok(())
    }

    /// Clamps onto the feasible region `{omega >= 1e-8, alpha1 >= 0, beta1 >= 0}`.
    pub fn project(self) -> Self {
        Self {
            omega: self.omega.max(OMEGA_FLOOR),
            alpha1: self.alpha1.max(0.0),
            beta1: self.beta1.max(0.0),
        }
    }

    pub fn persistence(&self) -> f64 {
        self.alpha1 + self.beta1
    }

    /// `omega / (1 - alpha1 - beta1)` for a stationary process.
    pub fn unconditional_variance(&self) -> Option<f64> {
        let p = self.persistence();
        (p < 1.0).then(|| self.omega / (1.0 - p))
    }
}

/// Standardized innovation and point conditional variance of the last step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualState {
    pub epsilon: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareBounds {
    pub confidence: f64,
    pub q_low: f64,
    pub q_high: f64,
}

impl ChiSquareBounds {
    pub fn new(confidence: f64) -> Result<Self> {
        make_bounds(confidence)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceInterval {
    pub lower: f64,
    pub point: f64,
    pub upper: f64,
}

impl VarianceInterval {
    pub fn constant(variance: f64) -> Self {
        Self {
            lower: variance,
            point: variance,
            upper: variance,
        }
    }
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// One step of the conditional variance recursion.
pub fn variance_step(params: &GarchParams, eps_sq_prev: f64, var_prev: f64) -> Result<f64> {
    check_finite(&[eps_sq_prev, var_prev], "variance recursion input")?;
    let v = params.omega + params.alpha1 * eps_sq_prev * var_prev + params.beta1 * var_prev;
    check_finite(&[v], "conditional variance")?;
    Ok(v)
}

/// Quantile of the chi-square distribution with one degree of freedom.
pub fn chi_square_quantile(p: f64) -> Result<f64> {
    special::chi_square_quantile(p)
}

/// Lower `alpha/2` and upper `1 - alpha/2` quantiles for `alpha = 1 - confidence`.
pub fn make_bounds(confidence: f64) -> Result<ChiSquareBounds> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let alpha = 1.0 - confidence;
    Ok(ChiSquareBounds {
        confidence,
        q_low: chi_square_quantile(alpha / 2.0)?,
        q_high: chi_square_quantile(1.0 - alpha / 2.0)?,
    })
}

/// Variance interval for the next step, with `E[eps^2] = 1` on the point track.
pub fn variance_interval_step(
    params: &GarchParams,
    var_prev: f64,
    bounds: &ChiSquareBounds,
) -> Result<VarianceInterval> {
    check_finite(&[var_prev], "previous variance")?;
    let shock = |eps_sq: f64| params.omega + params.alpha1 * eps_sq * var_prev + params.beta1 * var_prev;
    let lower = shock(bounds.q_low);
    let point = shock(1.0);
    let upper = shock(bounds.q_high);
    check_finite(&[lower, point, upper], "variance interval")?;
    // q_low < 1 < q_high only holds for confidence above ~0.32; below that the
    // interval is widened to contain the point track.
    Ok(VarianceInterval {
        lower: lower.min(point),
        point,
        upper: upper.max(point),
    })
}

/// A standardized residual, noting whether `sigma` had to be floored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardized {
    pub epsilon: f64,
    pub floored: bool,
}

/// `(actual - predicted) / max(sigma, floor)`.
pub fn residual_update(actual: f64, predicted: f64, sigma: f64, floor: f64) -> Result<Standardized> {
    check_finite(&[actual, predicted, sigma], "residual update input")?;
    if sigma <= 0.0 {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let floored = sigma < floor;
    let sigma = if floored { floor } else { sigma };
    Ok(Standardized {
        epsilon: (actual - predicted) / sigma,
        floored,
    })
}

/// Draws `Y_t = mean + eps_t * sigma_t` from a seeded ChaCha8 stream.
pub fn simulate_garch(params: &GarchParams, mean: f64, n: usize, seed: u64) -> Result<TimeSeries> {
    params.validate()?;
    if n == 0 {
        return Err(Error::invalid("simulation length must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut var = params.unconditional_variance().unwrap_or(params.omega);
    let mut eps_prev: Option<f64> = None;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        if let Some(e) = eps_prev {
            var = variance_step(params, e * e, var)?;
        }
        let eps: f64 = StandardNormal.sample(&mut rng);
        values.push(mean + eps * var.sqrt());
        eps_prev = Some(eps);
    }
    Ok(TimeSeries::new(format!("garch-sim-{seed}"), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(o: f64, a: f64, b: f64) -> GarchParams {
        GarchParams::new(o, a, b).unwrap()
    }

    #[test]
    fn variance_step_examples() {
        assert_eq!(variance_step(&p(1.0, 1.0, 1.0), 123.0, 0.0).unwrap(), 1.0);
        assert_relative_eq!(variance_step(&p(0.1, 0.2, 0.7), 1.0, 2.0).unwrap(), 1.9, epsilon = 1e-15);
        assert_eq!(variance_step(&p(0.05, 0.0, 0.0), 9.0, 4.0).unwrap(), 0.05);
        assert!(variance_step(&p(0.1, 0.2, 0.7), f64::NAN, 1.0).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(GarchParams::new(0.0, 0.1, 0.1).is_err());
        assert!(GarchParams::new(0.1, -0.1, 0.1).is_err());
        assert!(GarchParams::new(0.1, 0.1, f64::INFINITY).is_err());
    }

    #[test]
    fn bounds_examples() {
        let b = make_bounds(0.95).unwrap();
        assert_relative_eq!(b.q_low, 0.000_982_069_117_175, max_relative = 1e-8);
        assert_relative_eq!(b.q_high, 5.023_886_187_314_9, max_relative = 1e-10);
        let half = make_bounds(0.5).unwrap();
        assert_eq!(half.q_low, chi_square_quantile(0.25).unwrap());
        assert_eq!(half.q_high, chi_square_quantile(0.75).unwrap());
        assert!(make_bounds(1.0).is_err());
        assert!(make_bounds(0.0).is_err());
    }

    #[test]
    fn interval_examples() {
        let b = make_bounds(0.95).unwrap();
        let iv = variance_interval_step(&p(0.05, 0.1, 0.8), 1.0, &b).unwrap();
        assert_relative_eq!(iv.lower, 0.850_098_206_9, epsilon = 1e-9);
        assert_relative_eq!(iv.point, 0.95, epsilon = 1e-15);
        assert_relative_eq!(iv.upper, 1.352_388_618_7, epsilon = 1e-9);

        let iv = variance_interval_step(&p(0.3, 0.4, 0.5), 0.0, &b).unwrap();
        assert_eq!(iv, VarianceInterval::constant(0.3));

        let iv = variance_interval_step(&p(0.3, 0.0, 0.5), 2.0, &b).unwrap();
        assert_eq!(iv, VarianceInterval::constant(1.3));
    }

    #[test]
    fn residual_examples() {
        assert_eq!(residual_update(3.0, 1.0, 2.0, 1e-8).unwrap().epsilon, 1.0);
        assert_eq!(residual_update(5.0, 5.0, 0.7, 1e-8).unwrap().epsilon, 0.0);
        assert_eq!(residual_update(1.0, 3.0, 1.0, 1e-8).unwrap().epsilon, -2.0);
        assert!(residual_update(1.0, 3.0, 0.0, 1e-8).is_err());
        let r = residual_update(1.0, 0.0, 1e-12, 1e-8).unwrap();
        assert!(r.floored);
        assert_eq!(r.epsilon, 1e8);
    }

    #[test]
    fn simulate_is_deterministic() {
        let params = p(0.05, 0.3, 0.6);
        let a = simulate_garch(&params, 0.0, 500, 7).unwrap();
        let b = simulate_garch(&params, 0.0, 500, 7).unwrap();
        assert_eq!(a, b);
        let c = simulate_garch(&params, 0.0, 500, 8).unwrap();
        assert_ne!(a.values, c.values);
        assert!(simulate_garch(&params, 0.0, 0, 7).is_err());
    }

    #[test]
    fn simulate_constant_variance() {
        let s = simulate_garch(&p(1.0, 0.0, 0.0), 0.0, 10_000, 11).unwrap();
        let var = crate::series::sample_variance(&s.values);
        assert!((var - 1.0).abs() < 0.05, "var={var}");
    }

    #[test]
    fn simulate_mean() {
        let s = simulate_garch(&p(0.01, 0.0, 0.0), 10.0, 10_000, 3).unwrap();
        let mean = s.values.iter().sum::<f64>() / s.len() as f64;
        let se = (0.01f64 / 10_000.0).sqrt();
        assert!((mean - 10.0).abs() < 3.0 * se, "mean={mean}");
    }

    #[test]
    fn simulate_long_run_variance() {
        let params = p(0.05, 0.1, 0.8);
        let s = simulate_garch(&params, 0.0, 50_000, 2024).unwrap();
        let var = s.values.iter().map(|y| y * y).sum::<f64>() / s.len() as f64;
        let target = params.unconditional_variance().unwrap();
        assert!((var - target).abs() < 0.1 * target, "var={var} target={target}");
    }

    proptest! {
        #[test]
        fn step_never_below_omega(o in 1e-6f64..10.0, a in 0f64..2.0, b in 0f64..2.0,
                                  e in 0f64..50.0, v in 0f64..100.0) {
            prop_assert!(variance_step(&p(o, a, b), e, v).unwrap() >= o);
        }

        #[test]
        fn interval_ordered(o in 1e-6f64..10.0, a in 0f64..2.0, b in 0f64..2.0,
                            v in 0f64..100.0, conf in 0.01f64..0.999) {
            let bounds = make_bounds(conf).unwrap();
            let iv = variance_interval_step(&p(o, a, b), v, &bounds).unwrap();
            prop_assert!(iv.lower <= iv.point && iv.point <= iv.upper);
            prop_assert!(iv.lower > 0.0);
        }

        #[test]
        fn zero_residual_exact(y in -1e6f64..1e6, s in 1e-6f64..1e3) {
            prop_assert_eq!(residual_update(y, y, s, 1e-8).unwrap().epsilon, 0.0);
        }
    }
}

//! Reference simulators with analytically known outcome probabilities.
//!
//! These are the calibration targets for the whole pipeline: on
//! [`BernoulliSimulator`] the posterior, the outcome probability, and the
//! reconstructed surface all have closed forms.

use crate::error::Result;
use crate::params::ParameterVector;
use crate::rng::RngStream;
use crate::sampler::{OutcomeRecord, OutcomeSimulator};
use crate::scalar::Scalar;

/// Outcome holds with probability θ₀ (first coordinate). On the unit box with
/// a uniform prior: P(outcome) = 1/2, posterior density 2θ, and the
/// reconstructed likelihood is the identity L(θ) = θ.
#[derive(Debug, Clone, Copy)]
pub struct BernoulliSimulator;

impl<F: Scalar> OutcomeSimulator<F> for BernoulliSimulator {
    fn run(&self, theta: &ParameterVector<F>, rng: &mut RngStream) -> Result<OutcomeRecord> {
        let p = theta[0].as_f64().clamp(0.0, 1.0);
        Ok(OutcomeRecord::new(rng.bernoulli(p)))
    }
}

/// Outcome always (or never) holds, regardless of θ.
#[derive(Debug, Clone, Copy)]
pub struct ConstantSimulator(pub bool);

impl<F: Scalar> OutcomeSimulator<F> for ConstantSimulator {
    fn run(&self, _theta: &ParameterVector<F>, _rng: &mut RngStream) -> Result<OutcomeRecord> {
        Ok(OutcomeRecord::new(self.0))
    }
}

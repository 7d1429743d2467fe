//! Parameter spaces, priors, and proposal kernels.
//!
//! A [`ParameterSpace`] is an ordered list of named, bounded real dimensions;
//! a [`ParameterVector`] is one point in such a space. The only prior shipped
//! is the bounded uniform box ([`UniformBoxPrior`]); the prior is still an
//! interface ([`Prior`]) so tests and callers can plug in alternatives. The
//! proposal kernel is a per-dimension uniform window with reflection at the
//! box boundary, which keeps the kernel symmetric.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::scalar::Scalar;

/// One dimension of a parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct DimSpec<F: Scalar> {
    pub name: String,
    pub lower: F,
    pub upper: F,
    /// Integer-valued dimensions stay real inside the chain and the density
    /// estimate; values are rounded half-away-from-zero only when handed to a
    /// simulator.
    #[serde(default)]
    pub integer_valued: bool,
}

/// Named, bounded, ordered real parameter dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ParameterSpace<F: Scalar> {
    dims: Vec<DimSpec<F>>,
}

impl<F: Scalar> ParameterSpace<F> {
    pub fn new(dims: Vec<DimSpec<F>>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::contract("parameter space needs at least one dimension"));
        }
        for d in &dims {
            if d.name.is_empty() {
                return Err(Error::contract("dimension names must be non-empty"));
            }
            if !(d.lower.is_finite() && d.upper.is_finite()) {
                return Err(Error::contract(format!("dimension '{}' has non-finite bounds", d.name)));
            }
            if d.lower >= d.upper {
                return Err(Error::contract(format!(
                    "dimension '{}': lower bound {} must be < upper bound {}",
                    d.name, d.lower, d.upper
                )));
            }
            if d.integer_valued && (d.lower.fract() != F::zero() || d.upper.fract() != F::zero()) {
                return Err(Error::contract(format!(
                    "integer dimension '{}' must have integer bounds",
                    d.name
                )));
            }
        }
        for i in 1..dims.len() {
            if dims[..i].iter().any(|d| d.name == dims[i].name) {
                return Err(Error::contract(format!("duplicate dimension name '{}'", dims[i].name)));
            }
        }
        Ok(ParameterSpace { dims })
    }

    /// Convenience constructor for all-real dimensions.
    pub fn from_bounds(bounds: &[(&str, F, F)]) -> Result<Self> {
        Self::new(
            bounds
                .iter()
                .map(|&(name, lower, upper)| DimSpec {
                    name: name.to_string(),
                    lower,
                    upper,
                    integer_valued: false,
                })
                .collect(),
        )
    }

    pub fn n_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[DimSpec<F>] {
        &self.dims
    }

    pub fn names(&self) -> Vec<&str> {
        self.dims.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn volume(&self) -> F {
        self.dims
            .iter()
            .fold(F::one(), |acc, d| acc * (d.upper - d.lower))
    }

    pub fn contains(&self, theta: &ParameterVector<F>) -> bool {
        theta.len() == self.n_dims()
            && self
                .dims
                .iter()
                .zip(theta.values())
                .all(|(d, &v)| v >= d.lower && v <= d.upper)
    }

    pub fn check_dims(&self, theta: &ParameterVector<F>) -> Result<()> {
        if theta.len() != self.n_dims() {
            return Err(Error::contract(format!(
                "parameter vector has {} values, space has {} dimensions",
                theta.len(),
                self.n_dims()
            )));
        }
        Ok(())
    }

    /// Copy of `theta` with integer dimensions rounded half-away-from-zero.
    /// Used at the simulator boundary; the chain itself stays real-valued.
    pub fn integerized(&self, theta: &ParameterVector<F>) -> ParameterVector<F> {
        ParameterVector::new(
            self.dims
                .iter()
                .zip(theta.values())
                .map(|(d, &v)| if d.integer_valued { v.round() } else { v })
                .collect(),
        )
    }

    /// Box center; a convenient default evaluation point.
    pub fn center(&self) -> ParameterVector<F> {
        let half = F::from_f64_lossy(0.5);
        ParameterVector::new(self.dims.iter().map(|d| (d.lower + d.upper) * half).collect())
    }
}

/// One point of a parameter space: θ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ParameterVector<F: Scalar> {
    values: Vec<F>,
}

impl<F: Scalar> ParameterVector<F> {
    pub fn new(values: Vec<F>) -> Self {
        ParameterVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }
}

impl<F: Scalar> std::ops::Index<usize> for ParameterVector<F> {
    type Output = F;
    fn index(&self, i: usize) -> &F {
        &self.values[i]
    }
}

impl<F: Scalar> From<Vec<F>> for ParameterVector<F> {
    fn from(values: Vec<F>) -> Self {
        ParameterVector::new(values)
    }
}

/// Prior distribution over a parameter space: P(θ).
pub trait Prior<F: Scalar>: Send + Sync {
    fn space(&self) -> &ParameterSpace<F>;

    /// Draw θ from the prior.
    fn sample(&self, rng: &mut RngStream) -> ParameterVector<F>;

    /// Prior density at θ.
    fn density(&self, theta: &ParameterVector<F>) -> Result<F>;
}

/// Uniform prior on the space's box: constant 1/volume inside, 0 outside.
#[derive(Debug, Clone)]
pub struct UniformBoxPrior<F: Scalar> {
    space: ParameterSpace<F>,
}

impl<F: Scalar> UniformBoxPrior<F> {
    pub fn new(space: ParameterSpace<F>) -> Self {
        UniformBoxPrior { space }
    }
}

impl<F: Scalar> Prior<F> for UniformBoxPrior<F> {
    fn space(&self) -> &ParameterSpace<F> {
        &self.space
    }

    fn sample(&self, rng: &mut RngStream) -> ParameterVector<F> {
        let values = self
            .space
            .dims()
            .iter()
            .map(|d| {
                if d.integer_valued {
                    // Uniform over the integers lower..=upper.
                    let lo = d.lower.as_f64() as i64;
                    let hi = d.upper.as_f64() as i64;
                    let k = rng.below((hi - lo + 1) as u64) as i64;
                    F::from_f64_lossy((lo + k) as f64)
                } else {
                    rng.uniform(d.lower, d.upper)
                }
            })
            .collect();
        ParameterVector::new(values)
    }

    fn density(&self, theta: &ParameterVector<F>) -> Result<F> {
        self.space.check_dims(theta)?;
        if self.space.contains(theta) {
            Ok(F::one() / self.space.volume())
        } else {
            Ok(F::zero())
        }
    }
}

/// Fold a raw coordinate into `[lo, hi]` by repeated reflection at the bounds.
fn reflect<F: Scalar>(x: F, lo: F, hi: F) -> F {
    let width = hi - lo;
    let period = width + width;
    let mut y = (x - lo) % period;
    if y < F::zero() {
        y = y + period;
    }
    if y > width {
        y = period - y;
    }
    lo + y
}

/// Proposal kernel q(θ → θ').
pub trait ProposalKernel<F: Scalar>: Send + Sync {
    /// Propose θ' from θ; the result must lie inside the space.
    fn propose(
        &self,
        theta: &ParameterVector<F>,
        space: &ParameterSpace<F>,
        rng: &mut RngStream,
    ) -> ParameterVector<F>;

    /// log[q(to → from) / q(from → to)]; zero for symmetric kernels.
    fn log_density_ratio(&self, _from: &ParameterVector<F>, _to: &ParameterVector<F>) -> F {
        F::zero()
    }
}

/// Symmetric uniform-window proposal: θ' = θ + u with u uniform on the product
/// of [-wᵢ, +wᵢ], out-of-bounds components reflected at the box boundary.
/// Reflection on a box preserves q(θ→θ') = q(θ'→θ).
#[derive(Debug, Clone)]
pub struct UniformWindowKernel<F: Scalar> {
    half_widths: Vec<F>,
}

impl<F: Scalar> UniformWindowKernel<F> {
    pub fn new(half_widths: Vec<F>) -> Result<Self> {
        if half_widths.iter().any(|w| !w.is_finite() || *w < F::zero()) {
            return Err(Error::contract("proposal half-widths must be finite and >= 0"));
        }
        Ok(UniformWindowKernel { half_widths })
    }

    /// Half-widths set to `fraction` of each dimension's range.
    pub fn from_fraction(space: &ParameterSpace<F>, fraction: F) -> Result<Self> {
        Self::new(
            space
                .dims()
                .iter()
                .map(|d| (d.upper - d.lower) * fraction)
                .collect(),
        )
    }

    pub fn half_widths(&self) -> &[F] {
        &self.half_widths
    }
}

impl<F: Scalar> ProposalKernel<F> for UniformWindowKernel<F> {
    fn propose(
        &self,
        theta: &ParameterVector<F>,
        space: &ParameterSpace<F>,
        rng: &mut RngStream,
    ) -> ParameterVector<F> {
        assert_eq!(
            self.half_widths.len(),
            space.n_dims(),
            "kernel dimension mismatch"
        );
        let values = theta
            .values()
            .iter()
            .zip(self.half_widths.iter())
            .zip(space.dims())
            .map(|((&x, &w), d)| {
                let step = rng.uniform(-w, w);
                reflect(x + step, d.lower, d.upper)
            })
            .collect();
        ParameterVector::new(values)
    }
}

/// Metropolis-Hastings acceptance factor
/// h = min(1, P(θ')·q(θ'→θ) / (P(θ)·q(θ→θ'))).
///
/// For the shipped symmetric kernel with a uniform prior this is identically 1.
pub fn hastings_ratio<F: Scalar>(
    prior: &dyn Prior<F>,
    kernel: &dyn ProposalKernel<F>,
    from: &ParameterVector<F>,
    to: &ParameterVector<F>,
) -> Result<F> {
    let p_from = prior.density(from)?;
    let p_to = prior.density(to)?;
    if p_from <= F::zero() {
        return Err(Error::contract(
            "hastings_ratio: current state has zero prior density",
        ));
    }
    if p_to <= F::zero() {
        return Ok(F::zero());
    }
    let log_q = kernel.log_density_ratio(from, to);
    let ratio = (p_to / p_from) * log_q.exp();
    Ok(ratio.min(F::one()))
}

//! Importance-sampling estimate of the overall outcome probability and
//! reconstruction of the outcome-probability surface.
//!
//! With K the fitted density estimate of the posterior and P the prior, draws
//! θ⁽ⁱ⁾ ~ K are simulated once each; the weight P(θ⁽ⁱ⁾)/K(θ⁽ⁱ⁾) is kept when
//! the outcome holds and zeroed otherwise. The weight mean estimates
//! P(outcome), and the surface follows pointwise from
//! P(outcome | θ) = K(θ) · P(outcome) / P(θ).

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::KdeModel;
use crate::error::{Error, Result};
use crate::params::{ParameterVector, Prior};
use crate::rng::RngStream;
use crate::sampler::{Negated, OutcomeSimulator};
use crate::scalar::Scalar;
use crate::stats::{mean, sample_std};

/// Estimate of the marginal outcome probability P(outcome).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct MarginalEstimate<F: Scalar> {
    /// Mean importance weight.
    pub p_hat: F,
    /// Sample standard deviation of the weights divided by √M.
    pub std_error: F,
    /// Number of importance draws.
    pub m: usize,
    /// Draws whose outcome held (nonzero weight).
    pub nonzero_weight_count: usize,
}

/// Importance-sampling estimate of P(outcome) with M draws from the KDE.
///
/// Draw i uses the substream ("is", i), so the simulations can run on any
/// number of workers and the estimate is bit-identical regardless of schedule.
pub fn estimate_marginal<F: Scalar, S: OutcomeSimulator<F>>(
    kde: &KdeModel<F>,
    prior: &dyn Prior<F>,
    sim: &S,
    m: usize,
    rng: &RngStream,
) -> Result<MarginalEstimate<F>> {
    if m == 0 {
        return Err(Error::contract("importance sampling needs M >= 1"));
    }
    if kde.space() != prior.space() {
        return Err(Error::contract(
            "kde and prior must share one parameter space",
        ));
    }
    let draws: Vec<Result<F>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut stream = rng.substream("is", i as u64);
            let theta = kde.sample(&mut stream);
            let record = sim.run(&theta, &mut stream)?;
            if !record.outcome_holds {
                return Ok(F::zero());
            }
            let k = kde.density(&theta)?;
            let p = prior.density(&theta)?;
            Ok(p / k)
        })
        .collect();

    let mut weights = Vec::with_capacity(m);
    for d in draws {
        weights.push(d?);
    }
    let nonzero_weight_count = weights.iter().filter(|w| **w > F::zero()).count();
    let p_hat = mean(&weights);
    let std_error = sample_std(&weights) / F::from_usize(m).unwrap().sqrt();
    Ok(MarginalEstimate {
        p_hat,
        std_error,
        m,
        nonzero_weight_count,
    })
}

/// Consistency diagnostic |P̂(outcome) + P̂(complement) − 1|.
///
/// The complement estimate runs the same importance machinery against the
/// negated outcome with its own KDE. `kde_for_complement = None` encodes the
/// degenerate case where the complement chain could not initialize (empty
/// complement support); its probability is then taken as 0 by convention.
pub fn complement_check<F: Scalar, S: OutcomeSimulator<F>>(
    sim: &S,
    kde_for_outcome: &KdeModel<F>,
    kde_for_complement: Option<&KdeModel<F>>,
    prior: &dyn Prior<F>,
    m: usize,
    rng: &RngStream,
) -> Result<F> {
    let p_r = estimate_marginal(kde_for_outcome, prior, sim, m, &rng.substream("complement-r", 0))?;
    let p_rc = match kde_for_complement {
        Some(kde) => {
            estimate_marginal(
                kde,
                prior,
                &Negated(sim),
                m,
                &rng.substream("complement-rc", 0),
            )?
            .p_hat
        }
        None => F::zero(),
    };
    Ok((p_r.p_hat + p_rc - F::one()).abs())
}

/// Outcome probability at one point, clipped to [0, 1]; the raw value is kept
/// because density-estimation error can push the rearranged formula above 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct LikelihoodValue<F: Scalar> {
    pub value: F,
    pub raw: F,
}

/// P(outcome | θ) = K(θ) · p̂ / P(θ).
pub fn likelihood_at<F: Scalar>(
    kde: &KdeModel<F>,
    prior: &dyn Prior<F>,
    estimate: &MarginalEstimate<F>,
    theta: &ParameterVector<F>,
) -> Result<LikelihoodValue<F>> {
    let p = prior.density(theta)?;
    if p <= F::zero() {
        return Err(Error::Domain(
            "likelihood_at requires positive prior density".into(),
        ));
    }
    let raw = kde.density(theta)? * estimate.p_hat / p;
    Ok(LikelihoodValue {
        value: raw.clamp(F::zero(), F::one()),
        raw,
    })
}

/// One axis of an evaluation grid: either held fixed (a conditional slice) or
/// gridded over explicit ordered coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound = "F: Scalar")]
pub enum AxisSpec<F: Scalar> {
    Fixed(F),
    Points(Vec<F>),
}

/// Dense evaluation grid over a parameter space; one axis per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalGrid<F: Scalar> {
    pub axes: Vec<AxisSpec<F>>,
}

impl<F: Scalar> EvalGrid<F> {
    /// Midpoint grid: `counts[j]` interval midpoints per dimension.
    pub fn midpoints(space: &crate::params::ParameterSpace<F>, counts: &[usize]) -> Result<Self> {
        if counts.len() != space.n_dims() {
            return Err(Error::contract("one grid count per dimension required"));
        }
        let axes = space
            .dims()
            .iter()
            .zip(counts)
            .map(|(d, &c)| {
                if c == 0 {
                    return Err(Error::contract("grid counts must be >= 1"));
                }
                let width = (d.upper - d.lower) / F::from_usize(c).unwrap();
                Ok(AxisSpec::Points(
                    (0..c)
                        .map(|k| d.lower + width * (F::from_usize(k).unwrap() + F::from_f64_lossy(0.5)))
                        .collect(),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvalGrid { axes })
    }

    fn coords(&self) -> Vec<Vec<F>> {
        self.axes
            .iter()
            .map(|a| match a {
                AxisSpec::Fixed(v) => vec![*v],
                AxisSpec::Points(p) => p.clone(),
            })
            .collect()
    }
}

/// Gridded estimate of P(outcome | θ).
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodSurface<F: Scalar> {
    pub dim_names: Vec<String>,
    /// Evaluation coordinates per dimension (length 1 for fixed axes).
    pub axes: Vec<Vec<F>>,
    /// Values in row-major order (last axis fastest).
    pub values: Vec<F>,
    /// Per-point standard errors (grid-search surfaces only).
    pub std_errors: Option<Vec<F>>,
    /// The marginal estimate behind the reconstruction (absent for the
    /// grid-search baseline, which estimates pointwise proportions directly).
    pub p_r: Option<MarginalEstimate<F>>,
    /// Grid points whose raw value exceeded 1 and was clipped.
    pub clipped_count: usize,
}

pub(crate) fn grid_shape<F: Scalar>(axes: &[Vec<F>]) -> Vec<usize> {
    axes.iter().map(|a| a.len()).collect()
}

pub(crate) fn flat_len(shape: &[usize]) -> usize {
    shape.iter().product()
}

/// Decode a row-major flat index into per-axis indices.
pub(crate) fn unflatten(shape: &[usize], mut flat: usize) -> Vec<usize> {
    let mut idx = vec![0usize; shape.len()];
    for j in (0..shape.len()).rev() {
        idx[j] = flat % shape[j];
        flat /= shape[j];
    }
    idx
}

impl<F: Scalar> LikelihoodSurface<F> {
    pub fn shape(&self) -> Vec<usize> {
        grid_shape(&self.axes)
    }

    pub fn value_at(&self, idx: &[usize]) -> F {
        let shape = self.shape();
        let mut flat = 0usize;
        for (j, &i) in idx.iter().enumerate() {
            flat = flat * shape[j] + i;
        }
        self.values[flat]
    }

    /// Mean of all surface values (equal weights over grid points).
    pub fn mean_value(&self) -> F {
        mean(&self.values)
    }

    /// Average the surface over all axes not in `keep`, producing the
    /// lower-dimensional marginal-mean surface used for single- and
    /// pairwise-parameter panels.
    pub fn marginalize(&self, keep: &[usize]) -> Result<LikelihoodSurface<F>> {
        for &k in keep {
            if k >= self.axes.len() {
                return Err(Error::contract(format!("marginalize: no axis {k}")));
            }
        }
        let shape = self.shape();
        let kept_shape: Vec<usize> = keep.iter().map(|&k| shape[k]).collect();
        let out_len = flat_len(&kept_shape);
        let mut sums = vec![F::zero(); out_len];
        let mut counts = vec![0usize; out_len];
        for flat in 0..self.values.len() {
            let idx = unflatten(&shape, flat);
            let mut out = 0usize;
            for (pos, &k) in keep.iter().enumerate() {
                out = out * kept_shape[pos] + idx[k];
            }
            sums[out] = sums[out] + self.values[flat];
            counts[out] += 1;
        }
        let values = sums
            .into_iter()
            .zip(counts)
            .map(|(s, c)| s / F::from_usize(c).unwrap())
            .collect();
        Ok(LikelihoodSurface {
            dim_names: keep.iter().map(|&k| self.dim_names[k].clone()).collect(),
            axes: keep.iter().map(|&k| self.axes[k].clone()).collect(),
            values,
            std_errors: None,
            p_r: self.p_r,
            clipped_count: 0,
        })
    }

    /// CSV export: `<dim1>,<dim2>,...,likelihood[,std_error]` in row-major
    /// grid order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "{}", self.dim_names.join(","))?;
        write!(w, ",likelihood")?;
        if self.std_errors.is_some() {
            write!(w, ",std_error")?;
        }
        writeln!(w)?;
        let shape = self.shape();
        for flat in 0..self.values.len() {
            let idx = unflatten(&shape, flat);
            for (j, &i) in idx.iter().enumerate() {
                if j > 0 {
                    write!(w, ",")?;
                }
                write!(w, "{}", self.axes[j][i])?;
            }
            write!(w, ",{}", self.values[flat])?;
            if let Some(se) = &self.std_errors {
                write!(w, ",{}", se[flat])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// JSON sidecar with the marginal estimate and clipping diagnostics.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim_names": self.dim_names,
            "shape": self.shape(),
            "p_hat": self.p_r.as_ref().map(|e| e.p_hat.as_f64()),
            "std_error": self.p_r.as_ref().map(|e| e.std_error.as_f64()),
            "m": self.p_r.as_ref().map(|e| e.m),
            "nonzero_weight_count": self.p_r.as_ref().map(|e| e.nonzero_weight_count),
            "clipped_count": self.clipped_count,
        })
    }
}

/// Dense evaluation of [`likelihood_at`] over a grid, with conditional slices
/// expressed through fixed axes.
pub fn likelihood_grid<F: Scalar>(
    kde: &KdeModel<F>,
    prior: &dyn Prior<F>,
    estimate: &MarginalEstimate<F>,
    grid: &EvalGrid<F>,
) -> Result<LikelihoodSurface<F>> {
    let space = prior.space();
    if grid.axes.len() != space.n_dims() {
        return Err(Error::contract("one grid axis per dimension required"));
    }
    let axes = grid.coords();
    for (axis, dim) in axes.iter().zip(space.dims()) {
        if axis.is_empty() {
            return Err(Error::contract("empty grid axis"));
        }
        if axis.iter().any(|v| *v < dim.lower || *v > dim.upper) {
            return Err(Error::contract(format!(
                "grid coordinates leave the box on dimension '{}'",
                dim.name
            )));
        }
    }
    let shape = grid_shape(&axes);
    let total = flat_len(&shape);
    if total == 0 {
        return Err(Error::contract("empty evaluation grid"));
    }

    let evaluated: Vec<Result<LikelihoodValue<F>>> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let idx = unflatten(&shape, flat);
            let theta = ParameterVector::new(
                idx.iter().enumerate().map(|(j, &i)| axes[j][i]).collect(),
            );
            likelihood_at(kde, prior, estimate, &theta)
        })
        .collect();

    let mut values = Vec::with_capacity(total);
    let mut clipped_count = 0usize;
    for v in evaluated {
        let v = v?;
        if v.raw > F::one() {
            clipped_count += 1;
        }
        values.push(v.value);
    }

    Ok(LikelihoodSurface {
        dim_names: space.names().iter().map(|s| s.to_string()).collect(),
        axes,
        values,
        std_errors: None,
        p_r: Some(*estimate),
        clipped_count,
    })
}

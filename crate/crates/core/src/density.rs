//! Multivariate kernel density estimation of the posterior.
//!
//! Product-Gaussian kernel per sample point with per-dimension Scott-rule
//! bandwidths hⱼ = σ̂ⱼ · n^(−1/(d+4)). Each component is truncated to the
//! prior's support box and renormalized, so the estimate is a proper density
//! on the box: importance weights computed against it stay well-defined.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ParameterSpace, ParameterVector};
use crate::rng::RngStream;
use crate::scalar::Scalar;
use crate::stats::{pairwise_sum, sample_std};

/// Boundary treatment for kernel components.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Truncate each Gaussian component to the support box and renormalize it
    /// (the default; keeps the estimate a proper density on the box).
    #[default]
    Truncate,
    /// Plain unbounded Gaussian components. Mass leaks outside the box; kept
    /// as an explicit deviation knob for comparison runs.
    Unbounded,
}

/// Fit options.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KdeOptions {
    pub boundary: BoundaryMode,
    /// When a dimension has zero sample variance, fall back to a bandwidth of
    /// (box width)/100 for that dimension instead of failing; the affected
    /// dimensions are reported on the model.
    pub degenerate_fallback: bool,
}

impl Default for KdeOptions {
    fn default() -> Self {
        KdeOptions {
            boundary: BoundaryMode::Truncate,
            degenerate_fallback: false,
        }
    }
}

/// Fitted kernel density estimate K(θ).
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel<F: Scalar> {
    points: Vec<ParameterVector<F>>,
    bandwidths: Vec<F>,
    space: ParameterSpace<F>,
    boundary: BoundaryMode,
    /// Per-point probability mass inside the box (1 in unbounded mode).
    component_mass: Vec<F>,
    /// Dimensions whose bandwidth came from the degenerate fallback.
    degenerate_dims: Vec<usize>,
}

fn gauss_mass_in<F: Scalar>(center: F, h: F, lo: F, hi: F) -> F {
    ((hi - center) / h).normal_cdf() - ((lo - center) / h).normal_cdf()
}

impl<F: Scalar> KdeModel<F> {
    /// Assemble a model from explicit points and bandwidths. Normal use goes
    /// through [`fit_kde`]; this constructor exists for synthetic models in
    /// diagnostics and tests.
    pub fn from_parts(
        points: Vec<ParameterVector<F>>,
        bandwidths: Vec<F>,
        space: ParameterSpace<F>,
        boundary: BoundaryMode,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::KdeFit("a kde needs at least one point".into()));
        }
        if bandwidths.len() != space.n_dims() {
            return Err(Error::contract("bandwidth count must match dimension count"));
        }
        if bandwidths.iter().any(|h| !h.is_finite() || *h <= F::zero()) {
            return Err(Error::KdeFit("bandwidths must be positive".into()));
        }
        for p in &points {
            space.check_dims(p)?;
            if !space.contains(p) {
                return Err(Error::KdeFit("all kde points must lie inside the support box".into()));
            }
        }
        let component_mass = match boundary {
            BoundaryMode::Unbounded => vec![F::one(); points.len()],
            BoundaryMode::Truncate => points
                .iter()
                .map(|p| {
                    space
                        .dims()
                        .iter()
                        .enumerate()
                        .fold(F::one(), |acc, (j, d)| {
                            acc * gauss_mass_in(p[j], bandwidths[j], d.lower, d.upper)
                        })
                })
                .collect(),
        };
        Ok(KdeModel {
            points,
            bandwidths,
            space,
            boundary,
            component_mass,
            degenerate_dims: Vec::new(),
        })
    }

    pub fn points(&self) -> &[ParameterVector<F>] {
        &self.points
    }

    pub fn bandwidths(&self) -> &[F] {
        &self.bandwidths
    }

    pub fn space(&self) -> &ParameterSpace<F> {
        &self.space
    }

    pub fn degenerate_dims(&self) -> &[usize] {
        &self.degenerate_dims
    }

    /// Density at θ. Zero outside the support box; components are summed
    /// pairwise so the value is stable under reordering of the fit sample.
    pub fn density(&self, theta: &ParameterVector<F>) -> Result<F> {
        self.space.check_dims(theta)?;
        if self.boundary == BoundaryMode::Truncate && !self.space.contains(theta) {
            return Ok(F::zero());
        }
        let d = self.space.n_dims();
        let norm_const = self
            .bandwidths
            .iter()
            .fold(F::one(), |acc, &h| acc * h * F::from_f64_lossy((2.0 * std::f64::consts::PI).sqrt()));
        let terms: Vec<F> = self
            .points
            .iter()
            .zip(self.component_mass.iter())
            .map(|(p, &mass)| {
                let mut expo = F::zero();
                for j in 0..d {
                    let z = (theta[j] - p[j]) / self.bandwidths[j];
                    expo = expo + z * z;
                }
                (expo * F::from_f64_lossy(-0.5)).exp() / (norm_const * mass)
            })
            .collect();
        Ok(pairwise_sum(&terms) / F::from_usize(self.points.len()).unwrap())
    }

    /// Draw from the estimate: pick a component uniformly, then draw each
    /// coordinate from the component's box-truncated Gaussian by rejection.
    pub fn sample(&self, rng: &mut RngStream) -> ParameterVector<F> {
        let idx = rng.below(self.points.len() as u64) as usize;
        let center = &self.points[idx];
        let values = self
            .space
            .dims()
            .iter()
            .enumerate()
            .map(|(j, dim)| {
                let h = self.bandwidths[j];
                let mu = center[j];
                if self.boundary == BoundaryMode::Unbounded {
                    return mu + h * rng.standard_normal::<F>();
                }
                let mut tries = 0u32;
                loop {
                    let x = mu + h * rng.standard_normal::<F>();
                    if x >= dim.lower && x <= dim.upper {
                        break x;
                    }
                    tries += 1;
                    assert!(
                        tries < 1_000_000,
                        "truncated-normal rejection failed to terminate (bandwidth {h} vs box [{}, {}])",
                        dim.lower,
                        dim.upper
                    );
                }
            })
            .collect();
        ParameterVector::new(values)
    }

    /// CSV dump of the fit points (one row per point) for external plotting.
    pub fn write_points_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.space.names().join(","))?;
        for p in &self.points {
            let row: Vec<String> = p.values().iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// JSON description: bandwidths, boundary mode, degenerate dimensions.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n_points": self.points.len(),
            "bandwidths": self.bandwidths.iter().map(|h| h.as_f64()).collect::<Vec<_>>(),
            "boundary": self.boundary,
            "degenerate_dims": self.degenerate_dims,
            "dim_names": self.space.names(),
        })
    }
}

/// Fit with default options (truncated components, no degenerate fallback).
pub fn fit_kde<F: Scalar>(
    samples: &[ParameterVector<F>],
    space: &ParameterSpace<F>,
) -> Result<KdeModel<F>> {
    fit_kde_with(samples, space, &KdeOptions::default())
}

/// Fit a product-Gaussian KDE with Scott-rule bandwidths.
pub fn fit_kde_with<F: Scalar>(
    samples: &[ParameterVector<F>],
    space: &ParameterSpace<F>,
    options: &KdeOptions,
) -> Result<KdeModel<F>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::KdeFit(format!("need at least 2 samples, got {n}")));
    }
    for s in samples {
        space.check_dims(s)?;
        if !space.contains(s) {
            return Err(Error::KdeFit("sample outside the support box".into()));
        }
    }
    let d = space.n_dims();
    let scott = F::from_usize(n)
        .unwrap()
        .powf(-F::one() / F::from_usize(d + 4).unwrap());

    let mut bandwidths = Vec::with_capacity(d);
    let mut degenerate_dims = Vec::new();
    for (j, dim) in space.dims().iter().enumerate() {
        let column: Vec<F> = samples.iter().map(|s| s[j]).collect();
        let sd = sample_std(&column);
        if sd > F::zero() {
            bandwidths.push(sd * scott);
        } else if options.degenerate_fallback {
            degenerate_dims.push(j);
            bandwidths.push((dim.upper - dim.lower) / F::from_f64_lossy(100.0));
        } else {
            return Err(Error::KdeFit(format!(
                "zero sample variance in dimension '{}' ({j})",
                dim.name
            )));
        }
    }

    let mut model = KdeModel::from_parts(
        samples.to_vec(),
        bandwidths,
        space.clone(),
        options.boundary,
    )?;
    model.degenerate_dims = degenerate_dims;
    Ok(model)
}

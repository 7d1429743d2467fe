//! Conventional grid baseline: replicate simulations at every grid point and
//! record the outcome proportion. Used to validate the chain-derived surface.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{flat_len, grid_shape, unflatten, LikelihoodSurface};
use crate::params::{ParameterSpace, ParameterVector};
use crate::rng::RngStream;
use crate::sampler::OutcomeSimulator;
use crate::scalar::Scalar;

/// Grid layout and replication for the baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Intervals (midpoint mode) or points (linspace mode) per dimension.
    pub counts: Vec<usize>,
    /// Evaluate at interval midpoints (default) instead of an edge-inclusive
    /// linspace.
    pub midpoint: bool,
    /// Independent simulations per grid point.
    pub replicates: usize,
}

impl GridSpec {
    pub fn midpoints(counts: Vec<usize>, replicates: usize) -> Self {
        GridSpec {
            counts,
            midpoint: true,
            replicates,
        }
    }

    fn validate<F: Scalar>(&self, space: &ParameterSpace<F>) -> Result<()> {
        if self.counts.len() != space.n_dims() {
            return Err(Error::contract("one grid count per dimension required"));
        }
        if self.counts.iter().any(|&c| c == 0) {
            return Err(Error::contract("grid counts must be >= 1"));
        }
        if self.replicates == 0 {
            return Err(Error::contract("replicates must be >= 1"));
        }
        Ok(())
    }

    /// Evaluation coordinates per dimension.
    pub fn axes<F: Scalar>(&self, space: &ParameterSpace<F>) -> Result<Vec<Vec<F>>> {
        self.validate(space)?;
        let half = F::from_f64_lossy(0.5);
        Ok(space
            .dims()
            .iter()
            .zip(&self.counts)
            .map(|(d, &c)| {
                if self.midpoint || c == 1 {
                    let width = (d.upper - d.lower) / F::from_usize(c).unwrap();
                    (0..c)
                        .map(|k| d.lower + width * (F::from_usize(k).unwrap() + half))
                        .collect()
                } else {
                    let step = (d.upper - d.lower) / F::from_usize(c - 1).unwrap();
                    (0..c)
                        .map(|k| d.lower + step * F::from_usize(k).unwrap())
                        .collect()
                }
            })
            .collect())
    }
}

/// Run the grid baseline: r simulations per point, value = success proportion,
/// per-point binomial standard error recorded.
///
/// Each (point, replicate) pair gets the substream ("grid", point·r + rep), so
/// results are reduced by index and identical under any parallel schedule.
pub fn grid_estimate<F: Scalar, S: OutcomeSimulator<F>>(
    sim: &S,
    space: &ParameterSpace<F>,
    spec: &GridSpec,
    rng: &RngStream,
) -> Result<LikelihoodSurface<F>> {
    let axes = spec.axes(space)?;
    let shape = grid_shape(&axes);
    let n_points = flat_len(&shape);
    let r = spec.replicates;

    let runs: Vec<Result<bool>> = (0..n_points * r)
        .into_par_iter()
        .map(|flat| {
            let point = flat / r;
            let idx = unflatten(&shape, point);
            let theta = ParameterVector::new(
                idx.iter().enumerate().map(|(j, &i)| axes[j][i]).collect(),
            );
            let mut stream = rng.substream("grid", flat as u64);
            Ok(sim.run(&theta, &mut stream)?.outcome_holds)
        })
        .collect();

    let mut successes = vec![0usize; n_points];
    for (flat, run) in runs.into_iter().enumerate() {
        if run? {
            successes[flat / r] += 1;
        }
    }

    let r_f = F::from_usize(r).unwrap();
    let mut values = Vec::with_capacity(n_points);
    let mut std_errors = Vec::with_capacity(n_points);
    for s in successes {
        let p = F::from_usize(s).unwrap() / r_f;
        values.push(p);
        std_errors.push((p * (F::one() - p) / r_f).sqrt());
    }

    Ok(LikelihoodSurface {
        dim_names: space.names().iter().map(|s| s.to_string()).collect(),
        axes,
        values,
        std_errors: Some(std_errors),
        p_r: None,
        clipped_count: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{BernoulliSimulator, ConstantSimulator};
    use crate::rng::MasterSeed;
    use approx::assert_relative_eq;

    fn unit_space() -> ParameterSpace<f64> {
        ParameterSpace::from_bounds(&[("theta", 0.0, 1.0)]).unwrap()
    }

    #[test]
    fn always_true_grid_is_all_ones() {
        let space = unit_space();
        let spec = GridSpec::midpoints(vec![8], 5);
        let rng = RngStream::from_master(MasterSeed(61));
        let surface = grid_estimate(&ConstantSimulator(true), &space, &spec, &rng).unwrap();
        assert!(surface.values.iter().all(|&v| v == 1.0));
        assert!(surface.std_errors.unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bernoulli_grid_points_land_in_their_binomial_intervals() {
        let space = unit_space();
        let spec = GridSpec::midpoints(vec![20], 100);
        let rng = RngStream::from_master(MasterSeed(62));
        let surface = grid_estimate(&BernoulliSimulator, &space, &spec, &rng).unwrap();
        for (x, v) in surface.axes[0].iter().zip(&surface.values) {
            // 99% binomial CI around the true proportion θ at r = 100.
            let ci = 2.576 * (x * (1.0 - x) / 100.0).sqrt();
            assert!(
                (v - x).abs() <= ci.max(0.03),
                "grid point {x}: estimate {v} outside CI ±{ci}"
            );
        }
    }

    #[test]
    fn midpoint_axes_match_the_reference_protocol() {
        // Tree-experiment grid: skew in (0, ln 10) and scale in (0.02, 1),
        // each cut into 20 intervals, evaluated at midpoints.
        let ln10 = 10f64.ln();
        let space =
            ParameterSpace::from_bounds(&[("scale", 0.02, 1.0), ("skew", 0.0, ln10)]).unwrap();
        let spec = GridSpec::midpoints(vec![20, 20], 1);
        let axes = spec.axes(&space).unwrap();

        // Skew midpoints: (2k+1)·ln10/40.
        for (k, &g) in axes[1].iter().enumerate() {
            assert_relative_eq!(g, (2 * k + 1) as f64 * ln10 / 40.0, max_relative = 1e-12);
        }
        // Scale midpoints are true midpoints of (0.02, 1): 0.02 + (k+0.5)·0.049.
        for (k, &s) in axes[0].iter().enumerate() {
            assert_relative_eq!(s, 0.02 + (k as f64 + 0.5) * 0.049, max_relative = 1e-12);
        }
        assert_eq!(axes[0].len(), 20);
        assert_relative_eq!(axes[0][19], 0.9755, max_relative = 1e-12);
    }

    #[test]
    fn linspace_axes_include_the_edges() {
        let space = unit_space();
        let spec = GridSpec {
            counts: vec![5],
            midpoint: false,
            replicates: 1,
        };
        let axes = spec.axes(&space).unwrap();
        assert_eq!(axes[0], vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn deterministic_across_worker_counts() {
        let space = unit_space();
        let spec = GridSpec::midpoints(vec![10], 20);
        let rng = RngStream::from_master(MasterSeed(63));
        let a = grid_estimate(&BernoulliSimulator, &space, &spec, &rng).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool
            .install(|| grid_estimate(&BernoulliSimulator, &space, &spec, &rng))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn more_replicates_do_not_hurt_accuracy() {
        // Statistical check over repeats: mean absolute error at r=200 is no
        // larger than at r=50 on the Bernoulli oracle.
        let space = unit_space();
        let err_at = |r: usize, seed: u64| {
            let spec = GridSpec::midpoints(vec![10], r);
            let rng = RngStream::from_master(MasterSeed(seed));
            let surface = grid_estimate(&BernoulliSimulator, &space, &spec, &rng).unwrap();
            surface.axes[0]
                .iter()
                .zip(&surface.values)
                .map(|(x, v)| (v - x).abs())
                .sum::<f64>()
                / 10.0
        };
        let coarse: f64 = (0..10).map(|i| err_at(50, 100 + i)).sum::<f64>() / 10.0;
        let fine: f64 = (0..10).map(|i| err_at(200, 200 + i)).sum::<f64>() / 10.0;
        assert!(
            fine <= coarse,
            "error should not grow with replicates: r=50 {coarse}, r=200 {fine}"
        );
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let space = unit_space();
        let rng = RngStream::from_master(MasterSeed(64));
        assert!(grid_estimate(
            &ConstantSimulator(true),
            &space,
            &GridSpec::midpoints(vec![0], 1),
            &rng
        )
        .is_err());
        assert!(grid_estimate(
            &ConstantSimulator(true),
            &space,
            &GridSpec::midpoints(vec![5], 0),
            &rng
        )
        .is_err());
        assert!(grid_estimate(
            &ConstantSimulator(true),
            &space,
            &GridSpec::midpoints(vec![5, 5], 1),
            &rng
        )
        .is_err());
    }
}

//! The likelihood-free Metropolis chain.
//!
//! Instead of evaluating a likelihood, each proposed move is settled by one
//! simulation: propose θ', apply the prior/kernel acceptance test, and only
//! then simulate at θ' and accept iff the outcome event holds. The retained
//! states sample the posterior P(θ | outcome).

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{hastings_ratio, ParameterVector, Prior, ProposalKernel};
use crate::rng::{MasterSeed, RngStream};
use crate::scalar::Scalar;

/// One simulation outcome: did the event hold, plus auxiliary observables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub outcome_holds: bool,
    /// Named auxiliary metrics; names are stable per simulator.
    pub metrics: BTreeMap<String, f64>,
}

impl OutcomeRecord {
    pub fn new(outcome_holds: bool) -> Self {
        OutcomeRecord {
            outcome_holds,
            metrics: BTreeMap::new(),
        }
    }

    pub fn with_metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }
}

/// A parameterized stochastic simulator together with its outcome predicate.
///
/// Implementations must be deterministic given (θ, stream state): the same θ
/// and an identically-addressed stream produce an identical record.
pub trait OutcomeSimulator<F: Scalar = f64>: Send + Sync {
    fn run(&self, theta: &ParameterVector<F>, rng: &mut RngStream) -> Result<OutcomeRecord>;
}

/// Adapter negating a simulator's outcome; used for complement-event runs.
pub struct Negated<S>(pub S);

impl<F: Scalar, S: OutcomeSimulator<F>> OutcomeSimulator<F> for Negated<S> {
    fn run(&self, theta: &ParameterVector<F>, rng: &mut RngStream) -> Result<OutcomeRecord> {
        let mut rec = self.0.run(theta, rng)?;
        rec.outcome_holds = !rec.outcome_holds;
        Ok(rec)
    }
}

impl<F: Scalar, S: OutcomeSimulator<F> + ?Sized> OutcomeSimulator<F> for &S {
    fn run(&self, theta: &ParameterVector<F>, rng: &mut RngStream) -> Result<OutcomeRecord> {
        (**self).run(theta, rng)
    }
}

pub const DEFAULT_INIT_BUDGET: usize = 10_000;

/// Chain length, thinning, burn-in, and seeding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n_steps: usize,
    pub thin: usize,
    pub burn_in: usize,
    pub master_seed: u64,
    /// Maximum prior draws tried when searching for a valid starting point.
    #[serde(default = "default_init_budget")]
    pub init_attempt_budget: usize,
}

fn default_init_budget() -> usize {
    DEFAULT_INIT_BUDGET
}

impl ChainConfig {
    pub fn new(n_steps: usize, thin: usize, burn_in: usize, master_seed: u64) -> Result<Self> {
        let config = ChainConfig {
            n_steps,
            thin,
            burn_in,
            master_seed,
            init_attempt_budget: DEFAULT_INIT_BUDGET,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::contract("thin must be >= 1"));
        }
        if self.burn_in > self.n_steps {
            return Err(Error::contract(format!(
                "burn_in {} exceeds n_steps {}",
                self.burn_in, self.n_steps
            )));
        }
        if self.init_attempt_budget == 0 {
            return Err(Error::contract("init_attempt_budget must be >= 1"));
        }
        Ok(())
    }
}

/// How a chain step was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransitionKind {
    /// Step 0: the starting state.
    Initial,
    /// Move accepted: prior/kernel test passed and the outcome held.
    Accepted,
    /// Move rejected by the prior/kernel acceptance factor, before simulating.
    RejectedByPriorKernel,
    /// Move simulated but the outcome did not hold.
    RejectedByOutcome,
}

impl TransitionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TransitionKind::Initial => "initial",
            TransitionKind::Accepted => "accepted",
            TransitionKind::RejectedByPriorKernel => "rejected_by_prior_kernel",
            TransitionKind::RejectedByOutcome => "rejected_by_outcome",
        }
    }
}

/// One recorded chain state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct StateRecord<F: Scalar> {
    pub step: usize,
    pub theta: ParameterVector<F>,
    pub kind: TransitionKind,
}

/// Per-kind step counts (the initial state is not counted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TransitionCounts {
    pub accepted: usize,
    pub rejected_by_prior_kernel: usize,
    pub rejected_by_outcome: usize,
}

impl TransitionCounts {
    pub fn total(&self) -> usize {
        self.accepted + self.rejected_by_prior_kernel + self.rejected_by_outcome
    }
}

/// Per-kind acceptance/rejection rates; rates sum to 1 when the chain has steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceReport {
    pub accepted: f64,
    pub rejected_by_prior_kernel: f64,
    pub rejected_by_outcome: f64,
}

/// Full chain history plus the thinned, post-burn-in sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ChainTrace<F: Scalar> {
    pub states: Vec<StateRecord<F>>,
    pub retained: Vec<ParameterVector<F>>,
    pub counts: TransitionCounts,
    pub config: ChainConfig,
    pub dim_names: Vec<String>,
    /// Prior draws consumed before a valid starting point was found.
    pub init_attempts: usize,
}

impl<F: Scalar> ChainTrace<F> {
    pub fn acceptance_report(&self) -> AcceptanceReport {
        let n = self.counts.total();
        if n == 0 {
            return AcceptanceReport {
                accepted: 0.0,
                rejected_by_prior_kernel: 0.0,
                rejected_by_outcome: 0.0,
            };
        }
        let n = n as f64;
        AcceptanceReport {
            accepted: self.counts.accepted as f64 / n,
            rejected_by_prior_kernel: self.counts.rejected_by_prior_kernel as f64 / n,
            rejected_by_outcome: self.counts.rejected_by_outcome as f64 / n,
        }
    }

    /// Re-slice the stored history with different burn-in/thinning without
    /// re-running the chain. Step 0 (the initial state) is never retained;
    /// retained steps satisfy step >= burn_in and step % thin == 0.
    pub fn extract_samples(&self, burn_in: usize, thin: usize) -> Result<Vec<ParameterVector<F>>> {
        if thin == 0 {
            return Err(Error::contract("thin must be >= 1"));
        }
        if burn_in > self.config.n_steps {
            return Err(Error::contract(format!(
                "burn_in {} exceeds chain length {}",
                burn_in, self.config.n_steps
            )));
        }
        Ok(self
            .states
            .iter()
            .filter(|s| s.step > 0 && s.step >= burn_in && s.step % thin == 0)
            .map(|s| s.theta.clone())
            .collect())
    }

    /// CSV export: header `step,kind,<dim names...>`, one row per state.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "step,kind")?;
        for name in &self.dim_names {
            write!(w, ",{name}")?;
        }
        writeln!(w)?;
        for s in &self.states {
            write!(w, "{},{}", s.step, s.kind.as_str())?;
            for v in s.theta.values() {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Metadata sidecar: config, seed, initialization attempts, rates.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "config": self.config,
            "master_seed": self.config.master_seed,
            "dim_names": self.dim_names,
            "init_attempts": self.init_attempts,
            "counts": self.counts,
            "acceptance_rates": self.acceptance_report(),
            "retained_count": self.retained.len(),
        })
    }
}

/// Find a starting point: draw from the prior and simulate until the outcome
/// holds, within the configured attempt budget. When `initial` is given, that
/// point is simulated (repeatedly, since the simulator is stochastic) instead
/// of prior draws.
fn initialize<F: Scalar, S: OutcomeSimulator<F>>(
    sim: &S,
    prior: &dyn Prior<F>,
    initial: Option<ParameterVector<F>>,
    budget: usize,
    root: &RngStream,
) -> Result<(ParameterVector<F>, usize)> {
    for attempt in 0..budget {
        let mut stream = root.substream("init", attempt as u64);
        let theta = match &initial {
            Some(t) => t.clone(),
            None => prior.sample(&mut stream),
        };
        if !prior.space().contains(&theta) {
            return Err(Error::contract(
                "initial point lies outside the parameter space",
            ));
        }
        let record = sim.run(&theta, &mut stream)?;
        if record.outcome_holds {
            return Ok((theta, attempt + 1));
        }
    }
    Err(Error::ChainInit { budget })
}

/// Run the likelihood-free chain.
///
/// Each step: (1) propose θ' through the kernel; (2) compute the
/// prior/kernel acceptance factor h; (3) with probability h continue,
/// otherwise stay (no simulation is performed for these rejections);
/// (4) simulate at θ'; (5) accept iff the outcome holds.
pub fn run_chain<F: Scalar, S: OutcomeSimulator<F>>(
    sim: &S,
    prior: &dyn Prior<F>,
    kernel: &dyn ProposalKernel<F>,
    config: &ChainConfig,
    initial: Option<ParameterVector<F>>,
) -> Result<ChainTrace<F>> {
    config.validate()?;
    let space = prior.space();
    let root = RngStream::from_master(MasterSeed(config.master_seed));

    let (start, init_attempts) =
        initialize(sim, prior, initial, config.init_attempt_budget, &root)?;

    let mut states = Vec::with_capacity(config.n_steps + 1);
    states.push(StateRecord {
        step: 0,
        theta: start.clone(),
        kind: TransitionKind::Initial,
    });

    let mut counts = TransitionCounts::default();
    let mut current = start;

    for step in 1..=config.n_steps {
        let mut stream = root.substream("chain", step as u64);
        let proposed = kernel.propose(&current, space, &mut stream);
        let h = hastings_ratio(prior, kernel, &current, &proposed)?;
        let u: F = stream.unit();
        let kind = if u < h {
            let record = sim.run(&proposed, &mut stream)?;
            if record.outcome_holds {
                current = proposed;
                counts.accepted += 1;
                TransitionKind::Accepted
            } else {
                counts.rejected_by_outcome += 1;
                TransitionKind::RejectedByOutcome
            }
        } else {
            counts.rejected_by_prior_kernel += 1;
            TransitionKind::RejectedByPriorKernel
        };
        states.push(StateRecord {
            step,
            theta: current.clone(),
            kind,
        });
    }

    let retained = states
        .iter()
        .filter(|s| s.step > 0 && s.step >= config.burn_in && s.step % config.thin == 0)
        .map(|s| s.theta.clone())
        .collect();

    Ok(ChainTrace {
        states,
        retained,
        counts,
        config: config.clone(),
        dim_names: space.names().iter().map(|s| s.to_string()).collect(),
        init_attempts,
    })
}

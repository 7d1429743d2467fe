//! A small stochastic epidemic on a fixed synthetic two-layer contact
//! structure: households plus schools/workplaces. It exists to exercise the
//! paired-strategy machinery and the external-simulator protocol end to end,
//! and to show the qualitative peak-versus-total divergence between school
//! closure and antiviral response. It does not model any real city.
//!
//! Structure (N = 10,000): households of four; one member of each household
//! is a student attending one of ten schools; the other three work in one of
//! 150 workplaces. Transmission is hazard-based per layer, with the per-layer
//! hazards calibrated so the crude expected number of secondary infections in
//! a fully susceptible population equals the θ-supplied reproduction number.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::params::{ParameterSpace, ParameterVector};
use crate::rng::{MasterSeed, RngStream};

/// Response strategy evaluated by the paired-comparison driver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    None,
    Closure,
    Antiviral,
}

impl Strategy {
    pub fn parse(s: &str) -> Option<Strategy> {
        match s {
            "none" => Some(Strategy::None),
            "closure" => Some(Strategy::Closure),
            "antiviral" => Some(Strategy::Antiviral),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::None => "none",
            Strategy::Closure => "closure",
            Strategy::Antiviral => "antiviral",
        }
    }
}

/// Fixed model constants; θ supplies only (R0, f_v).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyEpidemicConfig {
    pub population: usize,
    pub household_size: usize,
    pub schools: usize,
    pub workplaces: usize,
    pub latent_days: u32,
    pub infectious_days: u32,
    pub horizon_days: u32,
    pub initial_infected: usize,
    /// Probability that a new case is ascertained at symptom onset.
    pub ascertain_probability: f64,
    /// Trigger: cumulative ascertained cases as a fraction of the population.
    pub response_threshold: f64,
    /// School closure duration once triggered.
    pub closure_days: u32,
    /// Multiplier on a treated case's household-layer transmission hazard.
    pub antiviral_case_factor: f64,
    /// Multiplier on household members' susceptibility (prophylaxis).
    pub antiviral_household_factor: f64,
    /// Antiviral courses that can be dispensed per day; ascertained cases
    /// beyond this go untreated, so the program saturates near the epidemic
    /// peak while covering the early phase and the tail.
    pub antiviral_daily_capacity: usize,
    /// Share of crude reproduction split among layers (household, school,
    /// workplace); must sum to 1.
    pub layer_shares: [f64; 3],
}

impl Default for ToyEpidemicConfig {
    fn default() -> Self {
        ToyEpidemicConfig {
            population: 10_000,
            household_size: 4,
            schools: 10,
            workplaces: 150,
            latent_days: 1,
            infectious_days: 2,
            horizon_days: 180,
            initial_infected: 10,
            ascertain_probability: 0.8,
            response_threshold: 0.008,
            closure_days: 14,
            antiviral_case_factor: 0.45,
            antiviral_household_factor: 0.45,
            antiviral_daily_capacity: 40,
            layer_shares: [0.32, 0.50, 0.18],
        }
    }
}

/// Per-run outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpidemicMetrics {
    /// Maximum number of simultaneously symptomatic (infectious) people.
    pub peak: u32,
    /// Total number ever infected.
    pub total: u32,
    /// Whether the ascertainment threshold was reached.
    pub triggered: bool,
}

#[derive(Clone, Copy, PartialEq)]
enum State {
    Susceptible,
    Exposed { days_left: u32 },
    Infectious { days_left: u32 },
    Removed,
}

/// Run one epidemic. Identical (r0, f_v, strategy, seed) always produce
/// identical metrics; paired strategies run from the same seed share every
/// random draw until their dynamics diverge.
pub fn toy_epidemic(
    r0: f64,
    f_v: f64,
    strategy: Strategy,
    seed: u64,
    config: &ToyEpidemicConfig,
) -> EpidemicMetrics {
    let n = config.population;
    let hh_size = config.household_size;
    let n_households = n / hh_size;
    let mut rng = RngStream::from_master(MasterSeed(seed));

    // Deterministic contact structure: person i lives in household i/size;
    // the first member of each household is a student, the rest work.
    let household = |i: usize| i / hh_size;
    let is_student = |i: usize| i % hh_size == 0;
    let group = |i: usize| {
        if is_student(i) {
            household(i) % config.schools
        } else {
            i % config.workplaces
        }
    };
    let students = n_households;
    let adults = n - students;
    let school_size = students / config.schools;
    let workplace_size = adults / config.workplaces;

    // Crude per-layer hazards: infectious_days × Σ contacts × hazard = share × R0.
    let d = config.infectious_days as f64;
    let [share_hh, share_school, share_work] = config.layer_shares;
    let student_fraction = students as f64 / n as f64;
    let beta_hh = share_hh * r0 / (d * (hh_size as f64 - 1.0));
    let beta_school =
        share_school * r0 / (d * student_fraction * (school_size as f64 - 1.0));
    let beta_work =
        share_work * r0 / (d * (1.0 - student_fraction) * (workplace_size as f64 - 1.0));

    let mut state = vec![State::Susceptible; n];
    let mut susceptibility = vec![1.0f64; n];
    // Household-layer transmission factor; antiviral treatment lowers it for
    // ascertained cases, leaving school/workplace transmission untouched.
    let mut hh_transmission = vec![1.0f64; n];

    // Vaccination removes a uniform fraction outright.
    let vaccinated = ((f_v * n as f64).round() as usize).min(n);
    for i in rng.distinct_indices(n, vaccinated) {
        state[i] = State::Removed;
    }

    // Seed infections among the unvaccinated.
    let open: Vec<usize> = (0..n)
        .filter(|&i| matches!(state[i], State::Susceptible))
        .collect();
    let seeds = config.initial_infected.min(open.len());
    let mut total: u32 = 0;
    let mut ascertained: u32 = 0;
    let threshold = (config.response_threshold * n as f64).ceil() as u32;
    let mut new_infectious: Vec<usize> = Vec::new();
    for k in rng.distinct_indices(open.len(), seeds) {
        let i = open[k];
        state[i] = State::Infectious {
            days_left: config.infectious_days,
        };
        total += 1;
        new_infectious.push(i);
    }

    let mut triggered_at: Option<u32> = None;
    let mut peak: u32 = 0;
    let mut hh_pressure = vec![0.0f64; n_households];
    let mut school_pressure = vec![0.0f64; config.schools];
    let mut work_pressure = vec![0.0f64; config.workplaces];

    for day in 0..config.horizon_days {
        // Ascertain yesterday's new cases (in index order) and apply the
        // antiviral policy once the response is active.
        let av_active =
            strategy == Strategy::Antiviral && triggered_at.is_some_and(|t| day > t);
        let mut courses_left = config.antiviral_daily_capacity;
        new_infectious.sort_unstable();
        for &i in &new_infectious {
            if rng.bernoulli(config.ascertain_probability) {
                ascertained += 1;
                if av_active && courses_left > 0 {
                    courses_left -= 1;
                    hh_transmission[i] = config.antiviral_case_factor;
                    let base = household(i) * hh_size;
                    for member in base..base + hh_size {
                        if member != i {
                            susceptibility[member] *= config.antiviral_household_factor;
                        }
                    }
                }
            }
        }
        new_infectious.clear();
        if triggered_at.is_none() && ascertained >= threshold {
            triggered_at = Some(day);
        }

        let schools_closed = strategy == Strategy::Closure
            && triggered_at.is_some_and(|t| day > t && day <= t + config.closure_days);

        // Layer pressures from the currently infectious.
        hh_pressure.fill(0.0);
        school_pressure.fill(0.0);
        work_pressure.fill(0.0);
        let mut infectious_now: u32 = 0;
        for i in 0..n {
            if let State::Infectious { .. } = state[i] {
                infectious_now += 1;
                hh_pressure[household(i)] += beta_hh * hh_transmission[i];
                if is_student(i) {
                    if !schools_closed {
                        school_pressure[group(i)] += beta_school;
                    }
                } else {
                    work_pressure[group(i)] += beta_work;
                }
            }
        }
        peak = peak.max(infectious_now);

        // Infection draws for susceptibles, ascending index order.
        let mut any_active = false;
        for i in 0..n {
            match state[i] {
                State::Susceptible => {
                    let pressure = hh_pressure[household(i)]
                        + if is_student(i) {
                            school_pressure[group(i)]
                        } else {
                            work_pressure[group(i)]
                        };
                    if pressure > 0.0 {
                        let p = 1.0 - (-susceptibility[i] * pressure).exp();
                        if rng.bernoulli(p) {
                            state[i] = State::Exposed {
                                days_left: config.latent_days,
                            };
                            total += 1;
                            any_active = true;
                        }
                    }
                }
                State::Exposed { .. } | State::Infectious { .. } => any_active = true,
                State::Removed => {}
            }
        }

        // Advance disease timers.
        for i in 0..n {
            state[i] = match state[i] {
                State::Exposed { days_left: 0 } | State::Exposed { days_left: 1 } => {
                    new_infectious.push(i);
                    State::Infectious {
                        days_left: config.infectious_days,
                    }
                }
                State::Exposed { days_left } => State::Exposed {
                    days_left: days_left - 1,
                },
                State::Infectious { days_left: 1 } => State::Removed,
                State::Infectious { days_left } => State::Infectious {
                    days_left: days_left - 1,
                },
                other => other,
            };
        }

        if !any_active && new_infectious.is_empty() {
            break;
        }
    }

    EpidemicMetrics {
        peak,
        total,
        triggered: triggered_at.is_some(),
    }
}

/// The epidemic case study's prior box: R0 in [1.2, 3], f_v in [0, 0.7].
pub fn epidemic_space() -> ParameterSpace<f64> {
    ParameterSpace::from_bounds(&[("R0", 1.2, 3.0), ("f_v", 0.0, 0.7)]).expect("valid bounds")
}

/// Decode θ = (R0, f_v).
pub fn decode_theta(theta: &ParameterVector<f64>) -> Result<(f64, f64)> {
    if theta.len() != 2 {
        return Err(crate::error::Error::contract(
            "epidemic parameters are (R0, f_v)",
        ));
    }
    Ok((theta[0], theta[1]))
}

//! Bottleneck → expansion → domestication → admixture simulator with marker
//! chromosomes, Dice distances, and the erroneous-monophyly outcome.
//!
//! Two wild populations are founded from small haplotype pools. Each is put
//! through a bottleneck, expanded into a domesticated population, and after a
//! domestication period the two are merged into one admixed population.
//! Sampling two genomes from each wild population, each pre-merge
//! domesticated population, and the final admixed population gives ten taxa;
//! the outcome event is a neighbor-joining bipartition that isolates exactly
//! the two admixed samples.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{ParameterSpace, ParameterVector};
use crate::phylo::{neighbor_joining, DistanceMatrix};
use crate::rng::RngStream;
use crate::sampler::{OutcomeRecord, OutcomeSimulator};
use rand::RngCore as _;

/// Marker loci per chromosome.
pub const MARKER_LOCI: usize = 100;

/// Founder haplotypes per wild population.
pub const FOUNDER_HAPLOTYPES: usize = 20;

/// A fixed-length bit vector of marker loci.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Chromosome {
    bits: u128,
}

impl Chromosome {
    pub fn from_bits(bits: u128, loci: usize) -> Self {
        Chromosome {
            bits: bits & mask(loci),
        }
    }

    pub fn bits(&self) -> u128 {
        self.bits
    }

    pub fn marker_count(&self) -> u32 {
        self.bits.count_ones()
    }
}

fn mask(loci: usize) -> u128 {
    if loci >= 128 {
        u128::MAX
    } else {
        (1u128 << loci) - 1
    }
}

/// A diploid individual: one pair of chromosomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Genome(pub Chromosome, pub Chromosome);

impl Genome {
    /// Marker presence pooled across the chromosome pair.
    pub fn presence(&self) -> u128 {
        self.0.bits | self.1.bits
    }
}

/// Where a sampled genome came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PopLabel {
    Wild(u8),
    Domesticated(u8),
    Admixed,
}

/// Model parameters: population sizes, phase durations, recombination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomesticationParams {
    /// Wild population size.
    pub n_w: usize,
    /// Bottleneck population size.
    pub n_b: usize,
    /// Bottleneck duration in generations.
    pub t_b: usize,
    /// Domesticated population size (also the admixed population size).
    pub n_d: usize,
    /// Domestication duration before the merge, in generations.
    pub t_d: usize,
    /// Generations after the merge.
    pub t_h: usize,
    /// Per-chromosome-pair recombination probability when forming a gamete.
    pub p_r: f64,
}

impl DomesticationParams {
    /// The prior box: n_w 1000..20000, n_b 10..39, t_b 5..25, n_d 40..400,
    /// t_d 10..50, t_h 25..400 (all integer), p_r 0..1.
    pub fn space() -> ParameterSpace<f64> {
        use crate::params::DimSpec;
        let int = |name: &str, lower: f64, upper: f64| DimSpec {
            name: name.to_string(),
            lower,
            upper,
            integer_valued: true,
        };
        ParameterSpace::new(vec![
            int("n_w", 1000.0, 20000.0),
            int("n_b", 10.0, 39.0),
            int("t_b", 5.0, 25.0),
            int("n_d", 40.0, 400.0),
            int("t_d", 10.0, 50.0),
            int("t_h", 25.0, 400.0),
            DimSpec {
                name: "p_r".to_string(),
                lower: 0.0,
                upper: 1.0,
                integer_valued: false,
            },
        ])
        .expect("valid bounds")
    }

    /// Decode a chain state: integer dimensions are rounded half-away-from-
    /// zero at this boundary; the chain itself stays real-valued.
    pub fn from_vector(theta: &ParameterVector<f64>) -> Result<Self> {
        if theta.len() != 7 {
            return Err(Error::contract("domestication parameters have 7 dimensions"));
        }
        let round = |x: f64| x.round() as usize;
        let params = DomesticationParams {
            n_w: round(theta[0]),
            n_b: round(theta[1]),
            t_b: round(theta[2]),
            n_d: round(theta[3]),
            t_d: round(theta[4]),
            t_h: round(theta[5]),
            p_r: theta[6],
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_w < 2 || self.n_b < 1 || self.n_d < 2 {
            return Err(Error::contract(
                "population sizes too small (need n_w >= 2, n_b >= 1, n_d >= 2)",
            ));
        }
        if !(0.0..=1.0).contains(&self.p_r) {
            return Err(Error::contract("p_r must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Founder-haplotype construction; isolated here so alternative founder
/// schemes can be swapped in without touching the population machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FounderModel {
    pub loci: usize,
    pub haplotypes_per_pool: usize,
    /// Share one haplotype pool between both wild populations instead of
    /// drawing independent pools.
    pub shared_pool: bool,
}

impl Default for FounderModel {
    fn default() -> Self {
        FounderModel {
            loci: MARKER_LOCI,
            haplotypes_per_pool: FOUNDER_HAPLOTYPES,
            shared_pool: false,
        }
    }
}

impl FounderModel {
    fn draw_haplotype(&self, rng: &mut RngStream) -> Chromosome {
        // Fair coin per locus, drawn as raw 64-bit words.
        let low = rng.next_u64() as u128;
        let high = (rng.next_u64() as u128) << 64;
        Chromosome::from_bits(low | high, self.loci)
    }

    /// One haplotype pool per wild population.
    pub fn draw_pools(&self, rng: &mut RngStream) -> [Vec<Chromosome>; 2] {
        let pool_a: Vec<Chromosome> = (0..self.haplotypes_per_pool)
            .map(|_| self.draw_haplotype(rng))
            .collect();
        let pool_b = if self.shared_pool {
            pool_a.clone()
        } else {
            (0..self.haplotypes_per_pool)
                .map(|_| self.draw_haplotype(rng))
                .collect()
        };
        [pool_a, pool_b]
    }
}

/// One gamete from a parent: with probability `p_r` the chromosome pair
/// recombines at a single crossover point uniform over the loci-1 junctions;
/// otherwise one chromosome is copied whole.
fn gamete(parent: &Genome, p_r: f64, loci: usize, rng: &mut RngStream) -> Chromosome {
    if p_r > 0.0 && rng.bernoulli(p_r) {
        let (lead, tail) = if rng.below(2) == 0 {
            (parent.0, parent.1)
        } else {
            (parent.1, parent.0)
        };
        let point = 1 + rng.below(loci as u64 - 1) as usize;
        let low = lead.bits & mask(point);
        let high = tail.bits & !mask(point);
        Chromosome::from_bits(low | high, loci)
    } else if rng.below(2) == 0 {
        parent.0
    } else {
        parent.1
    }
}

/// Non-overlapping generation step: each of `size` offspring picks two
/// parents uniformly with replacement and receives one gamete from each.
fn next_generation(
    parents: &[Genome],
    size: usize,
    p_r: f64,
    loci: usize,
    rng: &mut RngStream,
) -> Vec<Genome> {
    (0..size)
        .map(|_| {
            let pa = &parents[rng.below(parents.len() as u64) as usize];
            let pb = &parents[rng.below(parents.len() as u64) as usize];
            Genome(gamete(pa, p_r, loci, rng), gamete(pb, p_r, loci, rng))
        })
        .collect()
}

fn sample_two(pop: &[Genome], rng: &mut RngStream) -> [Genome; 2] {
    let picked = rng.distinct_indices(pop.len(), 2);
    [pop[picked[0]], pop[picked[1]]]
}

/// Everything the simulation hands back: the ten labeled sample genomes, the
/// diversity of the admixed sample, and the founder pools for diagnostics.
#[derive(Debug, Clone)]
pub struct DomesticationSample {
    pub genomes: Vec<(Genome, PopLabel)>,
    /// Mean pairwise Dice distance within the admixed sample.
    pub diversity: f64,
    pub founders: [Vec<Chromosome>; 2],
}

/// Run the full population model and draw the ten sample genomes.
pub fn simulate_domestication(
    params: &DomesticationParams,
    founder_model: &FounderModel,
    rng: &mut RngStream,
) -> Result<DomesticationSample> {
    params.validate()?;
    let loci = founder_model.loci;
    let founders = founder_model.draw_pools(rng);

    // Standing wild populations; they do not evolve during the experiment.
    let wild: Vec<Vec<Genome>> = founders
        .iter()
        .map(|pool| {
            (0..params.n_w)
                .map(|_| {
                    let a = pool[rng.below(pool.len() as u64) as usize];
                    let b = pool[rng.below(pool.len() as u64) as usize];
                    Genome(a, b)
                })
                .collect()
        })
        .collect();

    // Bottleneck, expansion, and domestication for each lineage.
    let mut domesticated: Vec<Vec<Genome>> = Vec::with_capacity(2);
    for w in &wild {
        let mut pop: Vec<Genome> = (0..params.n_b)
            .map(|_| w[rng.below(params.n_w as u64) as usize])
            .collect();
        for _ in 0..params.t_b {
            pop = next_generation(&pop, params.n_b, params.p_r, loci, rng);
        }
        pop = next_generation(&pop, params.n_d, params.p_r, loci, rng);
        for _ in 0..params.t_d {
            pop = next_generation(&pop, params.n_d, params.p_r, loci, rng);
        }
        domesticated.push(pop);
    }

    // The domesticated populations vanish at the merge; their samples are
    // recorded now.
    let dom_samples: Vec<[Genome; 2]> = domesticated.iter().map(|p| sample_two(p, rng)).collect();

    // Merge: uniform subsample of the pooled genomes back down to n_d.
    let pool: Vec<Genome> = domesticated.concat();
    let mut admixed: Vec<Genome> = rng
        .distinct_indices(pool.len(), params.n_d)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    for _ in 0..params.t_h {
        admixed = next_generation(&admixed, params.n_d, params.p_r, loci, rng);
    }

    let mut genomes = Vec::with_capacity(10);
    for (w, pop) in wild.iter().enumerate() {
        for g in sample_two(pop, rng) {
            genomes.push((g, PopLabel::Wild(w as u8)));
        }
    }
    for (d, pair) in dom_samples.iter().enumerate() {
        for g in pair {
            genomes.push((*g, PopLabel::Domesticated(d as u8)));
        }
    }
    let admixed_pair = sample_two(&admixed, rng);
    for g in admixed_pair {
        genomes.push((g, PopLabel::Admixed));
    }

    let diversity = dice_distance(&admixed_pair[0], &admixed_pair[1]);
    Ok(DomesticationSample {
        genomes,
        diversity,
        founders,
    })
}

/// Dice distance between pooled marker-presence sets:
/// 1 − 2|A∩B| / (|A|+|B|); two empty sets count as identical.
pub fn dice_distance(a: &Genome, b: &Genome) -> f64 {
    let (pa, pb) = (a.presence(), b.presence());
    let total = pa.count_ones() + pb.count_ones();
    if total == 0 {
        return 0.0;
    }
    1.0 - 2.0 * (pa & pb).count_ones() as f64 / total as f64
}

/// Pairwise Dice distances over a set of genomes.
pub fn dice_distance_matrix(genomes: &[Genome]) -> Result<DistanceMatrix> {
    if genomes.len() < 2 {
        return Err(Error::contract("dice matrix needs at least 2 genomes"));
    }
    let mut m = DistanceMatrix::zeros(genomes.len());
    for i in 0..genomes.len() {
        for j in (i + 1)..genomes.len() {
            m.set(i, j, dice_distance(&genomes[i], &genomes[j]));
        }
    }
    Ok(m)
}

/// The monophyly simulator; θ = (n_w, n_b, t_b, n_d, t_d, t_h, p_r).
#[derive(Debug, Clone, Default)]
pub struct DomesticationSimulator {
    pub founders: FounderModel,
}

impl OutcomeSimulator<f64> for DomesticationSimulator {
    fn run(&self, theta: &ParameterVector<f64>, rng: &mut RngStream) -> Result<OutcomeRecord> {
        let params = DomesticationParams::from_vector(theta)?;
        let sample = simulate_domestication(&params, &self.founders, rng)?;
        let genomes: Vec<Genome> = sample.genomes.iter().map(|(g, _)| *g).collect();
        let matrix = dice_distance_matrix(&genomes)?;

        let all_zero = matrix.max_value() == 0.0;
        let degenerate = all_zero || sample.diversity == 0.0;

        let tree = neighbor_joining(&matrix)?;
        // The two admixed samples occupy taxon slots 8 and 9.
        let admixed_split: u128 = (1 << 8) | (1 << 9);
        let monophyletic = tree.bipartitions()?.contains(&admixed_split);

        Ok(OutcomeRecord::new(monophyletic)
            .with_metric("diversity", sample.diversity)
            .with_metric("degenerate", f64::from(degenerate)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::MasterSeed;
    use rayon::prelude::*;
    use std::collections::HashSet;

    fn allaby_theta(n_d: f64, t_h: f64) -> ParameterVector<f64> {
        // (n_w, n_b, t_b, n_d, t_d, t_h, p_r)
        ParameterVector::new(vec![10_000.0, 20.0, 10.0, n_d, 20.0, t_h, 0.1])
    }

    fn quick_params() -> DomesticationParams {
        DomesticationParams {
            n_w: 200,
            n_b: 12,
            t_b: 5,
            n_d: 40,
            t_d: 10,
            t_h: 25,
            p_r: 0.1,
        }
    }

    #[test]
    fn dice_distance_hand_values() {
        let loci = MARKER_LOCI;
        let c = |bits: u128| Chromosome::from_bits(bits, loci);
        // A = {0,1,2,3}, B = {2,3,4,5}: |A| = |B| = 4, |A∩B| = 2 → 1 − 4/8 = 0.5
        let a = Genome(c(0b0000_1111), c(0));
        let b = Genome(c(0b0011_1100), c(0));
        assert_eq!(a.presence().count_ones(), 4);
        assert_eq!(b.presence().count_ones(), 4);
        assert_eq!(dice_distance(&a, &b), 0.5);

        // Identical genomes.
        assert_eq!(dice_distance(&a, &a), 0.0);
        // Disjoint presence sets.
        let d = Genome(c(0b1111 << 10), c(0));
        assert_eq!(dice_distance(&a, &d), 1.0);
        // Both empty counts as identical.
        let e = Genome(c(0), c(0));
        assert_eq!(dice_distance(&e, &e), 0.0);
    }

    #[test]
    fn dice_matrix_is_symmetric_zero_diagonal_unit_range() {
        let mut rng = RngStream::from_master(MasterSeed(110));
        let model = FounderModel::default();
        let genomes: Vec<Genome> = (0..12)
            .map(|_| {
                Genome(
                    model.draw_haplotype(&mut rng),
                    model.draw_haplotype(&mut rng),
                )
            })
            .collect();
        let m = dice_distance_matrix(&genomes).unwrap();
        for i in 0..12 {
            assert_eq!(m.get(i, i), 0.0);
            for j in 0..12 {
                assert_eq!(m.get(i, j), m.get(j, i));
                assert!((0.0..=1.0).contains(&m.get(i, j)));
            }
        }
    }

    #[test]
    fn without_recombination_all_chromosomes_are_founders() {
        let mut params = quick_params();
        params.p_r = 0.0;
        let mut rng = RngStream::from_master(MasterSeed(111));
        let sample =
            simulate_domestication(&params, &FounderModel::default(), &mut rng).unwrap();
        let founder_set: HashSet<u128> = sample
            .founders
            .iter()
            .flatten()
            .map(|c| c.bits())
            .collect();
        for (genome, label) in &sample.genomes {
            for chromo in [genome.0, genome.1] {
                assert!(
                    founder_set.contains(&chromo.bits()),
                    "non-founder haplotype sampled from {label:?}"
                );
            }
        }
    }

    #[test]
    fn absent_markers_never_reappear() {
        // No mutation: a locus absent from every parent stays absent.
        let loci = MARKER_LOCI;
        let blanked = 1u128 << 42;
        let mut rng = RngStream::from_master(MasterSeed(112));
        let model = FounderModel::default();
        let parents: Vec<Genome> = (0..30)
            .map(|_| {
                Genome(
                    Chromosome::from_bits(model.draw_haplotype(&mut rng).bits() & !blanked, loci),
                    Chromosome::from_bits(model.draw_haplotype(&mut rng).bits() & !blanked, loci),
                )
            })
            .collect();
        let mut pop = parents;
        for _ in 0..50 {
            pop = next_generation(&pop, 30, 0.5, loci, &mut rng);
            assert!(pop.iter().all(|g| g.presence() & blanked == 0));
        }
    }

    #[test]
    fn same_seed_same_sample() {
        let params = quick_params();
        let root = RngStream::from_master(MasterSeed(113));
        let a = simulate_domestication(&params, &FounderModel::default(), &mut root.substream("s", 0))
            .unwrap();
        let b = simulate_domestication(&params, &FounderModel::default(), &mut root.substream("s", 0))
            .unwrap();
        assert_eq!(a.genomes, b.genomes);
        assert_eq!(a.diversity, b.diversity);
    }

    #[test]
    fn sample_layout_is_ten_genomes_with_fixed_labels() {
        let params = quick_params();
        let mut rng = RngStream::from_master(MasterSeed(114));
        let sample =
            simulate_domestication(&params, &FounderModel::default(), &mut rng).unwrap();
        let labels: Vec<PopLabel> = sample.genomes.iter().map(|(_, l)| *l).collect();
        assert_eq!(
            labels,
            vec![
                PopLabel::Wild(0),
                PopLabel::Wild(0),
                PopLabel::Wild(1),
                PopLabel::Wild(1),
                PopLabel::Domesticated(0),
                PopLabel::Domesticated(0),
                PopLabel::Domesticated(1),
                PopLabel::Domesticated(1),
                PopLabel::Admixed,
                PopLabel::Admixed,
            ]
        );
    }

    #[test]
    fn drift_erodes_diversity_over_time() {
        // Longer post-merge histories at small population size lose marker
        // diversity; compare replicate means.
        let mean_diversity = |t_h: usize, tag: u64| {
            let root = RngStream::from_master(MasterSeed(115));
            let mut params = quick_params();
            params.t_h = t_h;
            (0..200u64)
                .into_par_iter()
                .map(|i| {
                    let mut s = root.substream("div", tag * 1000 + i);
                    simulate_domestication(&params, &FounderModel::default(), &mut s)
                        .unwrap()
                        .diversity
                })
                .sum::<f64>()
                / 200.0
        };
        let short = mean_diversity(25, 0);
        let long = mean_diversity(400, 1);
        assert!(
            long < short,
            "diversity should fall with time: t_h=25 → {short}, t_h=400 → {long}"
        );
    }

    fn monophyly_rate(theta: &ParameterVector<f64>, sim: &DomesticationSimulator, reps: u64, seed: u64) -> f64 {
        let root = RngStream::from_master(MasterSeed(seed));
        let hits: usize = (0..reps)
            .into_par_iter()
            .map(|i| {
                let mut s = root.substream("mono", i);
                usize::from(sim.run(theta, &mut s).unwrap().outcome_holds)
            })
            .sum();
        hits as f64 / reps as f64
    }

    #[test]
    fn monophyly_rises_with_post_merge_time() {
        let sim = DomesticationSimulator::default();
        let slow = monophyly_rate(&allaby_theta(40.0, 25.0), &sim, 100, 116);
        let fast = monophyly_rate(&allaby_theta(40.0, 400.0), &sim, 100, 117);
        assert!(
            fast > slow,
            "P(monophyly) should rise with t_h: t_h=25 → {slow}, t_h=400 → {fast}"
        );
    }

    #[test]
    fn monophyly_falls_with_population_size() {
        let sim = DomesticationSimulator::default();
        let small = monophyly_rate(&allaby_theta(40.0, 100.0), &sim, 100, 118);
        let large = monophyly_rate(&allaby_theta(400.0, 100.0), &sim, 100, 119);
        assert!(
            small > large,
            "P(monophyly) should fall with n_d: n_d=40 → {small}, n_d=400 → {large}"
        );
    }

    #[test]
    fn fixation_regime_fires_the_degeneracy_flag() {
        // Identical founder pools and a long post-merge phase at small size:
        // the admixed samples become identical and the flag must fire.
        let sim = DomesticationSimulator {
            founders: FounderModel {
                shared_pool: true,
                ..FounderModel::default()
            },
        };
        let theta = ParameterVector::new(vec![200.0, 12.0, 5.0, 40.0, 10.0, 2000.0, 0.1]);
        let root = RngStream::from_master(MasterSeed(120));
        let fires = (0..50u64)
            .filter(|&i| {
                let rec = sim.run(&theta, &mut root.substream("fix", i)).unwrap();
                rec.metrics["degenerate"] == 1.0 && rec.metrics["diversity"] == 0.0
            })
            .count();
        assert!(fires > 25, "degeneracy flag fired only {fires}/50 times");
    }

    #[test]
    fn parameter_decoding_rounds_half_away_from_zero() {
        let theta = ParameterVector::new(vec![1000.5, 10.4, 5.5, 40.49, 10.0, 25.5, 0.3]);
        let p = DomesticationParams::from_vector(&theta).unwrap();
        assert_eq!((p.n_w, p.n_b, p.t_b, p.n_d, p.t_d, p.t_h), (1001, 10, 6, 40, 10, 26));
        assert_eq!(p.p_r, 0.3);

        assert!(DomesticationParams::from_vector(&ParameterVector::new(vec![1.0; 6])).is_err());
        let bad_pr = ParameterVector::new(vec![1000.0, 10.0, 5.0, 40.0, 10.0, 25.0, 1.4]);
        assert!(DomesticationParams::from_vector(&bad_pr).is_err());
    }
}

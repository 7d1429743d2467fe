//! Tree-inference case study: compare UPGMA against neighbor-joining on
//! sequences evolved over randomly generated trees.
//!
//! The simulator pipeline: draw a pure-birth tree, skew and rescale its
//! edges, evolve nucleotide sequences under Jukes-Cantor, estimate pairwise
//! distances, build both trees, and score each against the true tree by
//! Robinson-Foulds distance. The outcome event is "UPGMA is at least as
//! close to the true tree as neighbor-joining" — ties count as success.

pub mod build;
pub mod distance;
pub mod evolve;
pub mod rf;
pub mod tree;
pub mod yule;

pub use build::{neighbor_joining, upgma};
pub use distance::{jc_distance_matrix, DistanceMatrix, JC_SATURATION_CAP};
pub use evolve::{evolve_sequences, jc_change_probability, Alignment};
pub use rf::robinson_foulds;
pub use tree::Phylogeny;
pub use yule::{apply_skew_scale, simulate_yule_tree};

use crate::error::Result;
use crate::params::{ParameterSpace, ParameterVector};
use crate::rng::RngStream;
use crate::sampler::{OutcomeRecord, OutcomeSimulator};

/// The tree-comparison simulator; θ = (scale, skew).
#[derive(Debug, Clone)]
pub struct PhyloSimulator {
    pub n_taxa: usize,
    pub seq_len: usize,
}

impl Default for PhyloSimulator {
    fn default() -> Self {
        PhyloSimulator {
            n_taxa: 30,
            seq_len: 1000,
        }
    }
}

impl PhyloSimulator {
    /// The case study's prior box: scale in (0.02, 1), skew in (0, ln 10).
    pub fn space() -> ParameterSpace<f64> {
        ParameterSpace::from_bounds(&[("scale", 0.02, 1.0), ("skew", 0.0, 10f64.ln())])
            .expect("valid bounds")
    }
}

impl OutcomeSimulator<f64> for PhyloSimulator {
    fn run(&self, theta: &ParameterVector<f64>, rng: &mut RngStream) -> Result<OutcomeRecord> {
        let (scale, skew) = (theta[0], theta[1]);
        let true_tree = simulate_yule_tree(self.n_taxa, rng)?;
        let true_tree = apply_skew_scale(true_tree, skew, scale, rng)?;
        let alignment = evolve_sequences(&true_tree, self.seq_len, rng)?;
        let (dmat, saturated_pairs) = jc_distance_matrix(&alignment);
        let nj = neighbor_joining(&dmat)?;
        let up = upgma(&dmat)?;
        let rf_nj = robinson_foulds(&nj, &true_tree)?;
        let rf_upgma = robinson_foulds(&up, &true_tree)?;
        Ok(OutcomeRecord::new(rf_upgma <= rf_nj)
            .with_metric("rf_nj", rf_nj as f64)
            .with_metric("rf_upgma", rf_upgma as f64)
            .with_metric("saturated_pairs", saturated_pairs as f64))
    }
}

/// Random rooted binary tree: repeatedly join two uniformly chosen subtrees;
/// edge lengths uniform on [0.1, 2). The leaf-to-leaf path matrix of such a
/// tree is additive by construction, which makes these trees the reference
/// instances for neighbor-joining recovery checks.
pub fn random_binary_tree(n_leaves: usize, rng: &mut RngStream) -> Phylogeny {
    assert!(n_leaves >= 2);
    let mut nodes: Vec<tree::Node> = (0..n_leaves)
        .map(|i| tree::Node {
            parent: None,
            children: Vec::new(),
            edge_len: rng.uniform(0.1, 2.0),
            leaf: Some(i),
        })
        .collect();
    let mut roots: Vec<usize> = (0..n_leaves).collect();
    while roots.len() > 1 {
        let i = rng.below(roots.len() as u64) as usize;
        let a = roots.swap_remove(i);
        let j = rng.below(roots.len() as u64) as usize;
        let b = roots.swap_remove(j);
        let id = nodes.len();
        nodes.push(tree::Node {
            parent: None,
            children: vec![a, b],
            edge_len: rng.uniform(0.1, 2.0),
            leaf: None,
        });
        nodes[a].parent = Some(id);
        nodes[b].parent = Some(id);
        roots.push(id);
    }
    let root = roots[0];
    nodes[root].edge_len = 0.0;
    Phylogeny::from_nodes(nodes, root, true).expect("construction is valid")
}

/// Random ultrametric (clocklike) tree: coalescent-style merges at strictly
/// increasing heights. All leaves sit at height zero, so UPGMA recovers the
/// tree exactly from its path matrix.
pub fn random_ultrametric_tree(n_leaves: usize, rng: &mut RngStream) -> Phylogeny {
    assert!(n_leaves >= 2);
    let mut nodes: Vec<tree::Node> = (0..n_leaves)
        .map(|i| tree::Node {
            parent: None,
            children: Vec::new(),
            edge_len: 0.0,
            leaf: Some(i),
        })
        .collect();
    let mut clusters: Vec<(usize, f64)> = (0..n_leaves).map(|i| (i, 0.0)).collect();
    let mut height = 0.0f64;
    while clusters.len() > 1 {
        height += rng.uniform(0.1, 1.0);
        let i = rng.below(clusters.len() as u64) as usize;
        let (a, ha) = clusters.swap_remove(i);
        let j = rng.below(clusters.len() as u64) as usize;
        let (b, hb) = clusters.swap_remove(j);
        let id = nodes.len();
        nodes.push(tree::Node {
            parent: None,
            children: vec![a, b],
            edge_len: 0.0,
            leaf: None,
        });
        nodes[a].parent = Some(id);
        nodes[a].edge_len = height - ha;
        nodes[b].parent = Some(id);
        nodes[b].edge_len = height - hb;
        clusters.push((id, height));
    }
    let root = clusters[0].0;
    Phylogeny::from_nodes(nodes, root, true).expect("construction is valid")
}

//! Jukes-Cantor sequence evolution along a tree.

use crate::error::{Error, Result};
use crate::phylo::tree::Phylogeny;
use crate::rng::RngStream;

const BASES: [char; 4] = ['A', 'C', 'G', 'T'];

/// Equal-length nucleotide sequences over {A,C,G,T}, one per leaf label.
/// Bases are stored as codes 0..=3.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    seqs: Vec<Vec<u8>>,
}

impl Alignment {
    pub fn from_codes(seqs: Vec<Vec<u8>>) -> Result<Self> {
        if seqs.is_empty() {
            return Err(Error::contract("alignment needs at least one sequence"));
        }
        let len = seqs[0].len();
        for s in &seqs {
            if s.len() != len {
                return Err(Error::contract("alignment sequences must have equal length"));
            }
            if s.iter().any(|&b| b > 3) {
                return Err(Error::contract("alignment codes must be in 0..=3"));
            }
        }
        Ok(Alignment { seqs })
    }

    pub fn n_sequences(&self) -> usize {
        self.seqs.len()
    }

    pub fn len(&self) -> usize {
        self.seqs[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sequence(&self, i: usize) -> &[u8] {
        &self.seqs[i]
    }

    pub fn mismatch_fraction(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (&self.seqs[i], &self.seqs[j]);
        let mismatches = a.iter().zip(b).filter(|(x, y)| x != y).count();
        mismatches as f64 / a.len() as f64
    }

    pub fn to_fasta(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.seqs.iter().enumerate() {
            out.push_str(&format!(">seq{i}\n"));
            out.extend(s.iter().map(|&b| BASES[b as usize]));
            out.push('\n');
        }
        out
    }
}

/// Probability that a site differs from its ancestor after evolving along an
/// edge of length `t` (expected substitutions per site) under Jukes-Cantor.
pub fn jc_change_probability(t: f64) -> f64 {
    0.75 * (1.0 - (-4.0 * t / 3.0).exp())
}

/// Evolve sequences of length `len` down a rooted tree: the root sequence is
/// uniform i.i.d. over the four bases; along each edge every site changes
/// independently with the Jukes-Cantor probability, picking one of the three
/// other bases uniformly.
pub fn evolve_sequences(tree: &Phylogeny, len: usize, rng: &mut RngStream) -> Result<Alignment> {
    if len == 0 {
        return Err(Error::contract("sequence length must be >= 1"));
    }
    let mut seqs: Vec<Option<Vec<u8>>> = vec![None; tree.n_nodes()];
    let root_seq: Vec<u8> = (0..len).map(|_| rng.below(4) as u8).collect();
    seqs[tree.root()] = Some(root_seq);

    let mut leaf_seqs: Vec<Option<Vec<u8>>> = vec![None; tree.n_leaves()];
    for id in tree.preorder() {
        if let Some(parent) = tree.node(id).parent {
            let p_change = jc_change_probability(tree.node(id).edge_len);
            let parent_seq = seqs[parent].as_ref().expect("preorder fills parents first");
            let seq: Vec<u8> = parent_seq
                .iter()
                .map(|&b| {
                    if p_change > 0.0 && rng.bernoulli(p_change) {
                        (b + 1 + rng.below(3) as u8) % 4
                    } else {
                        b
                    }
                })
                .collect();
            seqs[id] = Some(seq);
        }
        if let Some(label) = tree.node(id).leaf {
            leaf_seqs[label] = seqs[id].clone();
        }
    }
    Alignment::from_codes(leaf_seqs.into_iter().map(|s| s.expect("all leaves visited")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::MasterSeed;

    fn two_leaf_tree(t: f64) -> Phylogeny {
        Phylogeny::from_newick(&format!("(0:{t},1:0);")).unwrap()
    }

    #[test]
    fn zero_length_edge_copies_the_parent() {
        let tree = two_leaf_tree(0.0);
        let mut rng = RngStream::from_master(MasterSeed(70));
        let aln = evolve_sequences(&tree, 2_000, &mut rng).unwrap();
        assert_eq!(aln.sequence(0), aln.sequence(1));
    }

    #[test]
    fn long_edges_saturate_to_three_quarters() {
        let tree = two_leaf_tree(50.0);
        let mut rng = RngStream::from_master(MasterSeed(71));
        let aln = evolve_sequences(&tree, 100_000, &mut rng).unwrap();
        let p = aln.mismatch_fraction(0, 1);
        assert!((p - 0.75).abs() < 0.01, "saturated mismatch {p}");
    }

    #[test]
    fn short_edge_matches_jc_formula() {
        let tree = two_leaf_tree(0.1);
        let mut rng = RngStream::from_master(MasterSeed(72));
        let aln = evolve_sequences(&tree, 100_000, &mut rng).unwrap();
        let expected = jc_change_probability(0.1);
        assert!((expected - 0.0936).abs() < 1e-4);
        let p = aln.mismatch_fraction(0, 1);
        assert!((p - expected).abs() < 0.005, "mismatch {p} vs {expected}");
    }

    #[test]
    fn estimated_distance_converges_to_branch_length() {
        // Round trip: simulate at t = 0.2, re-estimate through the JC
        // transform, converge as the sequence grows.
        let tree = two_leaf_tree(0.2);
        let mut rng = RngStream::from_master(MasterSeed(73));
        let aln = evolve_sequences(&tree, 1_000_000, &mut rng).unwrap();
        let (d, _) = crate::phylo::distance::jc_distance_matrix(&aln);
        assert!((d.get(0, 1) - 0.2).abs() < 0.01, "estimate {}", d.get(0, 1));
    }

    #[test]
    fn fasta_dump_shape() {
        let aln = Alignment::from_codes(vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(aln.to_fasta(), ">seq0\nACGT\n");
    }
}

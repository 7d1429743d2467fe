//! Robinson-Foulds distance: the symmetric-difference count of non-trivial
//! bipartitions. Rooted trees are compared as unrooted.

use crate::error::{Error, Result};
use crate::phylo::tree::Phylogeny;

pub fn robinson_foulds(t1: &Phylogeny, t2: &Phylogeny) -> Result<usize> {
    if t1.n_leaves() != t2.n_leaves() {
        return Err(Error::contract(format!(
            "robinson_foulds: trees have {} and {} leaves",
            t1.n_leaves(),
            t2.n_leaves()
        )));
    }
    let a = t1.bipartitions()?;
    let b = t2.bipartitions()?;
    Ok(a.symmetric_difference(&b).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{MasterSeed, RngStream};
    use std::collections::HashSet;

    #[test]
    fn identical_trees_have_distance_zero() {
        let t = Phylogeny::from_newick("((0:1,1:1):1,(2:1,(3:1,4:1):1):1);").unwrap();
        assert_eq!(robinson_foulds(&t, &t).unwrap(), 0);
    }

    #[test]
    fn distinct_quartets_differ_by_two() {
        // Hand enumeration: each quartet topology carries one non-trivial
        // split; {0,1}|{2,3} vs {0,2}|{1,3} share none, so RF = 2.
        let a = Phylogeny::from_newick("((0:1,1:1):1,(2:1,3:1):1);").unwrap();
        let b = Phylogeny::from_newick("((0:1,2:1):1,(1:1,3:1):1);").unwrap();
        assert_eq!(robinson_foulds(&a, &b).unwrap(), 2);
    }

    #[test]
    fn leaf_count_mismatch_is_rejected() {
        let a = Phylogeny::from_newick("((0:1,1:1):1,(2:1,3:1):1);").unwrap();
        let b = Phylogeny::from_newick("(0:1,(1:1,2:1):1);").unwrap();
        assert!(robinson_foulds(&a, &b).is_err());
    }

    /// Random rooted binary tree over n leaves: repeatedly join two random
    /// subtrees. Used here and by the kernel acceptance suite.
    pub(crate) fn random_tree(n: usize, rng: &mut RngStream) -> Phylogeny {
        crate::phylo::random_binary_tree(n, rng)
    }

    #[test]
    fn random_30_leaf_trees_respect_the_structural_bound() {
        let mut rng = RngStream::from_master(MasterSeed(80));
        for _ in 0..20 {
            let a = random_tree(30, &mut rng);
            let b = random_tree(30, &mut rng);
            let rf = robinson_foulds(&a, &b).unwrap();
            assert!(rf <= 2 * (30 - 3), "rf {rf}");
        }
    }

    /// Brute-force bipartitions by explicit edge removal and connectivity
    /// flood on the undirected node graph; independent of the bitmask route
    /// used by `Phylogeny::bipartitions`.
    fn brute_force_bipartitions(t: &Phylogeny) -> HashSet<Vec<usize>> {
        let n_nodes = t.n_nodes();
        let mut adj = vec![Vec::new(); n_nodes];
        for id in 0..n_nodes {
            if let Some(p) = t.node(id).parent {
                adj[id].push(p);
                adj[p].push(id);
            }
        }
        let all_leaves: HashSet<usize> = (0..t.n_leaves()).collect();
        let mut out = HashSet::new();
        for cut_child in 0..n_nodes {
            let Some(cut_parent) = t.node(cut_child).parent else {
                continue;
            };
            // Flood from cut_child without crossing the removed edge.
            let mut seen = vec![false; n_nodes];
            seen[cut_child] = true;
            let mut stack = vec![cut_child];
            let mut side = Vec::new();
            while let Some(u) = stack.pop() {
                if let Some(label) = t.node(u).leaf {
                    side.push(label);
                }
                for &v in &adj[u] {
                    if seen[v] || (u == cut_child && v == cut_parent) {
                        continue;
                    }
                    seen[v] = true;
                    stack.push(v);
                }
            }
            let mut side: HashSet<usize> = side.into_iter().collect();
            if side.contains(&0) {
                side = all_leaves.difference(&side).copied().collect();
            }
            if side.len() >= 2 && side.len() <= t.n_leaves() - 2 {
                let mut sorted: Vec<usize> = side.into_iter().collect();
                sorted.sort_unstable();
                out.insert(sorted);
            }
        }
        out
    }

    fn brute_force_rf(a: &Phylogeny, b: &Phylogeny) -> usize {
        brute_force_bipartitions(a)
            .symmetric_difference(&brute_force_bipartitions(b))
            .count()
    }

    #[test]
    fn agrees_with_the_brute_force_oracle() {
        let mut rng = RngStream::from_master(MasterSeed(81));
        let trees: Vec<Phylogeny> = (0..50).map(|_| random_tree(6, &mut rng)).collect();
        for i in 0..trees.len() {
            for j in i..trees.len() {
                assert_eq!(
                    robinson_foulds(&trees[i], &trees[j]).unwrap(),
                    brute_force_rf(&trees[i], &trees[j]),
                    "pair ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn rf_is_a_metric_on_sampled_triples() {
        let mut rng = RngStream::from_master(MasterSeed(82));
        for _ in 0..50 {
            let a = random_tree(7, &mut rng);
            let b = random_tree(7, &mut rng);
            let c = random_tree(7, &mut rng);
            let ab = robinson_foulds(&a, &b).unwrap();
            let ba = robinson_foulds(&b, &a).unwrap();
            assert_eq!(ab, ba, "symmetry");
            let bc = robinson_foulds(&b, &c).unwrap();
            let ac = robinson_foulds(&a, &c).unwrap();
            assert!(ac <= ab + bc, "triangle inequality: {ac} > {ab} + {bc}");
        }
    }
}

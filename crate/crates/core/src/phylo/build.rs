//! Distance-based tree construction: neighbor-joining and UPGMA.
//!
//! Ties in the join criteria are broken toward the lexicographically lowest
//! pair of cluster slots so construction is bit-reproducible.

use crate::error::{Error, Result};
use crate::phylo::distance::DistanceMatrix;
use crate::phylo::tree::{Node, Phylogeny};

/// Classical neighbor-joining. Exact on additive matrices. The returned tree
/// is unrooted: a degree-3 placeholder root joins the last three clusters.
///
/// Non-additive input can yield negative branch-length estimates; those are
/// clamped to zero.
pub fn neighbor_joining(d: &DistanceMatrix) -> Result<Phylogeny> {
    let n = d.n();
    if n < 3 {
        return Err(Error::contract("neighbor-joining needs at least 3 taxa"));
    }

    let mut nodes: Vec<Node> = (0..n)
        .map(|i| Node {
            parent: None,
            children: Vec::new(),
            edge_len: 0.0,
            leaf: Some(i),
        })
        .collect();

    // Active clusters: tree node id + working distance row.
    let mut ids: Vec<usize> = (0..n).collect();
    let mut dist: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| d.get(i, j)).collect()).collect();

    while ids.len() > 3 {
        let m = ids.len();
        let row_sums: Vec<f64> = (0..m).map(|i| dist[i].iter().sum()).collect();
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..m {
            for j in (i + 1)..m {
                let q = (m as f64 - 2.0) * dist[i][j] - row_sums[i] - row_sums[j];
                if best.is_none_or(|(bq, _, _)| q < bq) {
                    best = Some((q, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("m > 3");

        let dij = dist[i][j];
        let li = 0.5 * dij + (row_sums[i] - row_sums[j]) / (2.0 * (m as f64 - 2.0));
        let lj = dij - li;
        let (li, lj) = (li.max(0.0), lj.max(0.0));

        let new_id = nodes.len();
        nodes.push(Node {
            parent: None,
            children: vec![ids[i], ids[j]],
            edge_len: 0.0,
            leaf: None,
        });
        nodes[ids[i]].parent = Some(new_id);
        nodes[ids[i]].edge_len = li;
        nodes[ids[j]].parent = Some(new_id);
        nodes[ids[j]].edge_len = lj;

        let new_row: Vec<f64> = (0..m)
            .filter(|&k| k != i && k != j)
            .map(|k| 0.5 * (dist[i][k] + dist[j][k] - dij))
            .collect();

        // Drop slots j then i (j > i), append the merged cluster.
        let remove = |v: &mut Vec<Vec<f64>>, idx: usize| {
            v.remove(idx);
            for row in v.iter_mut() {
                row.remove(idx);
            }
        };
        remove(&mut dist, j);
        remove(&mut dist, i);
        ids.remove(j);
        ids.remove(i);
        for (k, row) in dist.iter_mut().enumerate() {
            row.push(new_row[k]);
        }
        let mut full_row = new_row;
        full_row.push(0.0);
        dist.push(full_row);
        ids.push(new_id);
    }

    // Final three clusters join a central node with the three-point formulas.
    let (a, b, c) = (0, 1, 2);
    let (dab, dac, dbc) = (dist[a][b], dist[a][c], dist[b][c]);
    let la = (0.5 * (dab + dac - dbc)).max(0.0);
    let lb = (0.5 * (dab + dbc - dac)).max(0.0);
    let lc = (0.5 * (dac + dbc - dab)).max(0.0);
    let center = nodes.len();
    nodes.push(Node {
        parent: None,
        children: vec![ids[a], ids[b], ids[c]],
        edge_len: 0.0,
        leaf: None,
    });
    for (&id, len) in ids.iter().zip([la, lb, lc]) {
        nodes[id].parent = Some(center);
        nodes[id].edge_len = len;
    }

    Phylogeny::from_nodes(nodes, center, false)
}

/// UPGMA (average linkage, size-weighted). Produces a rooted ultrametric
/// tree; node heights are half the merge distance.
pub fn upgma(d: &DistanceMatrix) -> Result<Phylogeny> {
    let n = d.n();
    if n < 2 {
        return Err(Error::contract("upgma needs at least 2 taxa"));
    }

    let mut nodes: Vec<Node> = (0..n)
        .map(|i| Node {
            parent: None,
            children: Vec::new(),
            edge_len: 0.0,
            leaf: Some(i),
        })
        .collect();

    let mut ids: Vec<usize> = (0..n).collect();
    let mut sizes: Vec<f64> = vec![1.0; n];
    let mut heights: Vec<f64> = vec![0.0; n];
    let mut dist: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| d.get(i, j)).collect()).collect();

    while ids.len() > 1 {
        let m = ids.len();
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..m {
            for j in (i + 1)..m {
                if best.is_none_or(|(bd, _, _)| dist[i][j] < bd) {
                    best = Some((dist[i][j], i, j));
                }
            }
        }
        let (dij, i, j) = best.expect("m >= 2");
        let height = 0.5 * dij;

        let new_id = nodes.len();
        nodes.push(Node {
            parent: None,
            children: vec![ids[i], ids[j]],
            edge_len: 0.0,
            leaf: None,
        });
        nodes[ids[i]].parent = Some(new_id);
        nodes[ids[i]].edge_len = (height - heights[i]).max(0.0);
        nodes[ids[j]].parent = Some(new_id);
        nodes[ids[j]].edge_len = (height - heights[j]).max(0.0);

        let (si, sj) = (sizes[i], sizes[j]);
        let new_row: Vec<f64> = (0..m)
            .filter(|&k| k != i && k != j)
            .map(|k| (si * dist[i][k] + sj * dist[j][k]) / (si + sj))
            .collect();

        let remove_slot = |v: &mut Vec<Vec<f64>>, idx: usize| {
            v.remove(idx);
            for row in v.iter_mut() {
                row.remove(idx);
            }
        };
        remove_slot(&mut dist, j);
        remove_slot(&mut dist, i);
        ids.remove(j);
        ids.remove(i);
        sizes.remove(j);
        sizes.remove(i);
        heights.remove(j);
        heights.remove(i);
        for (k, row) in dist.iter_mut().enumerate() {
            row.push(new_row[k]);
        }
        let mut full_row = new_row;
        full_row.push(0.0);
        dist.push(full_row);
        ids.push(new_id);
        sizes.push(si + sj);
        heights.push(height);
    }

    let root = ids[0];
    Phylogeny::from_nodes(nodes, root, true)
}

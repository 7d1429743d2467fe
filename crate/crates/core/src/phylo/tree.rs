//! Phylogeny representation: arena-backed trees with edge lengths, Newick
//! formatting, leaf-to-leaf path distances, and bipartition extraction.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::phylo::distance::DistanceMatrix;

/// One tree node; `edge_len` is the length of the edge to the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub edge_len: f64,
    /// Leaf label in 0..n_leaves; `None` for internal nodes.
    pub leaf: Option<usize>,
}

/// A phylogenetic tree with leaves labeled 0..n-1 and non-negative edge
/// lengths. Rooted trees have a binary root; trees produced by
/// neighbor-joining carry a degree-3 placeholder root and are read as
/// unrooted.
#[derive(Debug, Clone, PartialEq)]
pub struct Phylogeny {
    nodes: Vec<Node>,
    root: usize,
    n_leaves: usize,
    rooted: bool,
}

impl Phylogeny {
    pub(crate) fn from_nodes(nodes: Vec<Node>, root: usize, rooted: bool) -> Result<Self> {
        let mut labels: Vec<usize> = nodes.iter().filter_map(|n| n.leaf).collect();
        let n_leaves = labels.len();
        labels.sort_unstable();
        labels.dedup();
        if labels.len() != n_leaves || labels.last().is_some_and(|&l| l != n_leaves - 1) {
            return Err(Error::contract("leaf labels must be exactly 0..n_leaves"));
        }
        if nodes.iter().any(|n| n.edge_len < 0.0 || !n.edge_len.is_finite()) {
            return Err(Error::contract("edge lengths must be finite and >= 0"));
        }
        Ok(Phylogeny {
            nodes,
            root,
            n_leaves,
            rooted,
        })
    }

    pub fn n_leaves(&self) -> usize {
        self.n_leaves
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_rooted(&self) -> bool {
        self.rooted
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub(crate) fn node_mut(&mut self, id: usize) -> &mut Node {
        &mut self.nodes[id]
    }

    /// Node ids in preorder (parent before children, children in stored order).
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            order.push(id);
            for &c in self.nodes[id].children.iter().rev() {
                stack.push(c);
            }
        }
        order
    }

    /// Maximum root-to-leaf path length.
    pub fn height(&self) -> f64 {
        let mut depth = vec![0.0f64; self.nodes.len()];
        let mut max = 0.0f64;
        for id in self.preorder() {
            if let Some(p) = self.nodes[id].parent {
                depth[id] = depth[p] + self.nodes[id].edge_len;
            }
            if self.nodes[id].leaf.is_some() {
                max = max.max(depth[id]);
            }
        }
        max
    }

    /// Multiply every edge length by `factor`.
    pub(crate) fn scale_edges(&mut self, factor: f64) {
        for n in &mut self.nodes {
            n.edge_len *= factor;
        }
    }

    /// Leaf-to-leaf path-length matrix, indexed by leaf label.
    pub fn leaf_distance_matrix(&self) -> DistanceMatrix {
        let mut depth = vec![0.0f64; self.nodes.len()];
        let order = self.preorder();
        for &id in &order {
            if let Some(p) = self.nodes[id].parent {
                depth[id] = depth[p] + self.nodes[id].edge_len;
            }
        }
        // Leaf sets below each node, accumulated bottom-up.
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.nodes.len()];
        let mut d = DistanceMatrix::zeros(self.n_leaves);
        for &id in order.iter().rev() {
            if let Some(label) = self.nodes[id].leaf {
                below[id].push(label);
                continue;
            }
            let children = self.nodes[id].children.clone();
            // Pairs of leaves whose lowest common ancestor is this node.
            for a in 0..children.len() {
                for b in (a + 1)..children.len() {
                    for &u in &below[children[a]] {
                        for &v in &below[children[b]] {
                            let (lu, lv) = (self.leaf_node(u), self.leaf_node(v));
                            let dist = depth[lu] + depth[lv] - 2.0 * depth[id];
                            d.set(u, v, dist);
                        }
                    }
                }
            }
            let mut merged = Vec::new();
            for &c in &children {
                merged.extend_from_slice(&below[c]);
            }
            below[id] = merged;
        }
        d
    }

    fn leaf_node(&self, label: usize) -> usize {
        self.nodes
            .iter()
            .position(|n| n.leaf == Some(label))
            .expect("label exists")
    }

    /// Non-trivial bipartitions of the leaf set, one per internal edge, as
    /// canonical bitmasks (the side not containing leaf 0). Rooted trees are
    /// read as unrooted: the two edges at a binary root induce the same split
    /// and collapse into one entry.
    pub fn bipartitions(&self) -> Result<HashSet<u128>> {
        if self.n_leaves > 128 {
            return Err(Error::contract("bipartitions support at most 128 leaves"));
        }
        let full: u128 = if self.n_leaves == 128 {
            u128::MAX
        } else {
            (1u128 << self.n_leaves) - 1
        };
        let mut mask = vec![0u128; self.nodes.len()];
        let mut splits = HashSet::new();
        for &id in self.preorder().iter().rev() {
            mask[id] = match self.nodes[id].leaf {
                Some(label) => 1u128 << label,
                None => self.nodes[id]
                    .children
                    .iter()
                    .fold(0u128, |acc, &c| acc | mask[c]),
            };
            if self.nodes[id].parent.is_none() {
                continue;
            }
            let side = mask[id];
            let canonical = if side & 1 != 0 { full & !side } else { side };
            let size = canonical.count_ones() as usize;
            if size >= 2 && size <= self.n_leaves - 2 {
                splits.insert(canonical);
            }
        }
        Ok(splits)
    }

    /// Newick serialization; leaves print their labels, every non-root node
    /// prints its edge length.
    pub fn to_newick(&self) -> String {
        let mut out = String::new();
        self.write_newick(self.root, &mut out);
        out.push(';');
        out
    }

    fn write_newick(&self, id: usize, out: &mut String) {
        let node = &self.nodes[id];
        if let Some(label) = node.leaf {
            write!(out, "{label}").unwrap();
        } else {
            out.push('(');
            for (k, &c) in node.children.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                self.write_newick(c, out);
            }
            out.push(')');
        }
        if node.parent.is_some() {
            write!(out, ":{}", node.edge_len).unwrap();
        }
    }

    /// Parse the Newick subset produced by [`Phylogeny::to_newick`]:
    /// integer leaf labels, `:length` annotations, unnamed internal nodes.
    pub fn from_newick(text: &str) -> Result<Self> {
        let text = text.trim();
        let body = text
            .strip_suffix(';')
            .ok_or_else(|| Error::contract("newick must end with ';'"))?;
        let mut nodes: Vec<Node> = Vec::new();
        let chars: Vec<char> = body.chars().collect();
        let mut pos = 0usize;
        let root = parse_subtree(&chars, &mut pos, &mut nodes)?;
        if pos != chars.len() {
            return Err(Error::contract("trailing characters after newick tree"));
        }
        let rooted = nodes[root].children.len() == 2;
        Phylogeny::from_nodes(nodes, root, rooted)
    }
}

fn parse_subtree(chars: &[char], pos: &mut usize, nodes: &mut Vec<Node>) -> Result<usize> {
    let id = if chars.get(*pos) == Some(&'(') {
        *pos += 1;
        let mut children = Vec::new();
        loop {
            let child = parse_subtree(chars, pos, nodes)?;
            children.push(child);
            match chars.get(*pos) {
                Some(',') => *pos += 1,
                Some(')') => {
                    *pos += 1;
                    break;
                }
                other => return Err(Error::contract(format!("newick: unexpected {other:?}"))),
            }
        }
        let id = nodes.len();
        nodes.push(Node {
            parent: None,
            children: children.clone(),
            edge_len: 0.0,
            leaf: None,
        });
        for c in children {
            nodes[c].parent = Some(id);
        }
        id
    } else {
        let start = *pos;
        while chars.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
            *pos += 1;
        }
        if start == *pos {
            return Err(Error::contract("newick: expected leaf label"));
        }
        let label: usize = chars[start..*pos]
            .iter()
            .collect::<String>()
            .parse()
            .map_err(|e| Error::contract(format!("newick label: {e}")))?;
        let id = nodes.len();
        nodes.push(Node {
            parent: None,
            children: Vec::new(),
            edge_len: 0.0,
            leaf: Some(label),
        });
        id
    };
    if chars.get(*pos) == Some(&':') {
        *pos += 1;
        let start = *pos;
        while chars
            .get(*pos)
            .is_some_and(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '-' | '+'))
        {
            *pos += 1;
        }
        let len: f64 = chars[start..*pos]
            .iter()
            .collect::<String>()
            .parse()
            .map_err(|e| Error::contract(format!("newick length: {e}")))?;
        nodes[id].edge_len = len;
    }
    Ok(id)
}

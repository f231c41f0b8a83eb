//! Labeled trees on `[n]`, the Prüfer bijection, and uniform sampling and
//! enumeration of trees with a prescribed degree sequence.
//!
//! Nodes are 0-based internally; the text edge-list format is 1-based.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::arith::{factorial, from_uint};
use crate::degree_model::{validate_degree_sequence, DegreeModel, DegreeSequence};
use crate::error::{Error, Result};

/// Upper bound on the number of trees [`enumerate_trees`] will produce.
pub const MAX_ENUMERATED_TREES: u64 = 10_000_000;

/// A labeled tree with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledTree {
    adjacency: Vec<Vec<u32>>,
}

impl LabeledTree {
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTree("empty vertex set".into()));
        }
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges, a tree on {n} nodes has {}",
                edges.len(),
                n - 1
            )));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidTree(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::InvalidTree(format!("self-loop at {u}")));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidTree("parallel edges".into()));
            }
        }
        let tree = LabeledTree { adjacency };
        if !tree.is_connected() {
            return Err(Error::InvalidTree("not connected".into()));
        }
        Ok(tree)
    }

    fn from_adjacency_unchecked(mut adjacency: Vec<Vec<u32>>) -> Self {
        for list in &mut adjacency {
            list.sort_unstable();
        }
        LabeledTree { adjacency }
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &self.adjacency[u as usize] {
                if !seen[v as usize] {
                    seen[v as usize] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n()
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adjacency[v as usize]
    }

    pub fn degree(&self, v: u32) -> u32 {
        self.adjacency[v as usize].len() as u32
    }

    pub fn degrees(&self) -> Vec<u32> {
        self.adjacency.iter().map(|a| a.len() as u32).collect()
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        validate_degree_sequence(self.degrees()).expect("tree degrees are a valid sequence")
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adjacency[u as usize].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.n().saturating_sub(1));
        for (u, list) in self.adjacency.iter().enumerate() {
            for &v in list {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }

    /// The tree with node `v` renamed to `perm[v]`.
    pub fn relabel(&self, perm: &[u32]) -> LabeledTree {
        let mut adjacency = vec![Vec::new(); self.n()];
        for (u, list) in self.adjacency.iter().enumerate() {
            adjacency[perm[u] as usize] = list.iter().map(|&v| perm[v as usize]).collect();
        }
        LabeledTree::from_adjacency_unchecked(adjacency)
    }

    /// First line `n`, then one `u v` line per edge, 1-based.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{} {}", u + 1, v + 1);
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<LabeledTree> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("missing node count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("node count: {e}")))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace();
            let mut next = || -> Result<u32> {
                let label: u32 = parts
                    .next()
                    .ok_or_else(|| Error::Parse(format!("bad edge line {line:?}")))?
                    .parse()
                    .map_err(|e| Error::Parse(format!("edge line {line:?}: {e}")))?;
                if label == 0 {
                    return Err(Error::Parse("labels are 1-based".into()));
                }
                Ok(label - 1)
            };
            let u = next()?;
            let v = next()?;
            edges.push((u, v));
        }
        LabeledTree::from_edges(n, &edges)
    }
}

/// Prüfer code of a labeled tree, 0-based symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PruferSequence {
    n: usize,
    symbols: Vec<u32>,
}

impl PruferSequence {
    pub fn new(n: usize, symbols: Vec<u32>) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewNodes(n));
        }
        if symbols.len() != n - 2 {
            return Err(Error::PruferLength {
                n,
                expected: n - 2,
                actual: symbols.len(),
            });
        }
        if let Some(&symbol) = symbols.iter().find(|&&s| s as usize >= n) {
            return Err(Error::SymbolOutOfRange { symbol, n });
        }
        Ok(PruferSequence { n, symbols })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }
}

/// Decodes by repeatedly joining the smallest remaining leaf to the next
/// symbol.
pub fn prufer_decode(seq: &PruferSequence) -> LabeledTree {
    let n = seq.n;
    let mut degree = vec![1u32; n];
    for &s in &seq.symbols {
        degree[s as usize] += 1;
    }
    let mut adjacency = vec![Vec::new(); n];
    let mut link = |a: usize, b: usize| {
        adjacency[a].push(b as u32);
        adjacency[b].push(a as u32);
    };
    let mut ptr = degree.iter().position(|&d| d == 1).expect("a leaf exists");
    let mut leaf = ptr;
    for &s in &seq.symbols {
        let v = s as usize;
        link(leaf, v);
        degree[v] -= 1;
        if degree[v] == 1 && v < ptr {
            leaf = v;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    link(leaf, n - 1);
    LabeledTree::from_adjacency_unchecked(adjacency)
}

pub fn prufer_encode(tree: &LabeledTree) -> PruferSequence {
    let n = tree.n();
    if n <= 2 {
        return PruferSequence {
            n,
            symbols: Vec::new(),
        };
    }
    // parents with respect to the root n - 1
    let mut parent = vec![u32::MAX; n];
    let mut stack = vec![(n - 1) as u32];
    parent[n - 1] = (n - 1) as u32;
    while let Some(u) = stack.pop() {
        for &v in tree.neighbors(u) {
            if parent[v as usize] == u32::MAX {
                parent[v as usize] = u;
                stack.push(v);
            }
        }
    }
    let mut degree = tree.degrees();
    let mut symbols = Vec::with_capacity(n - 2);
    let mut ptr = degree.iter().position(|&d| d == 1).expect("a leaf exists");
    let mut leaf = ptr;
    for _ in 0..n - 2 {
        let next = parent[leaf] as usize;
        symbols.push(next as u32);
        degree[next] -= 1;
        if degree[next] == 1 && next < ptr {
            leaf = next;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    PruferSequence { n, symbols }
}

/// Number of labeled trees with degree sequence `d`:
/// `(n-2)! / prod (d_i - 1)!`.
pub fn count_trees(d: &DegreeSequence) -> BigUint {
    let n = d.n() as u64;
    let den = d.degrees().iter().fold(BigUint::from(1u32), |acc, &x| {
        acc * factorial(u64::from(x) - 1)
    });
    factorial(n - 2) / den
}

fn symbol_multiset(d: &DegreeSequence) -> Vec<u32> {
    d.degrees()
        .iter()
        .enumerate()
        .flat_map(|(i, &deg)| std::iter::repeat_n(i as u32, deg as usize - 1))
        .collect()
}

/// A uniform random tree with degree sequence exactly `d`.
pub fn sample_tree<R: Rng + ?Sized>(d: &DegreeSequence, rng: &mut R) -> LabeledTree {
    let mut symbols = symbol_multiset(d);
    symbols.shuffle(rng);
    prufer_decode(&PruferSequence { n: d.n(), symbols })
}

/// Every tree with degree sequence `d`, each exactly once.
pub fn enumerate_trees(d: &DegreeSequence) -> Result<TreeEnumerator> {
    let count = count_trees(d);
    if count.to_u64().is_none_or(|c| c > MAX_ENUMERATED_TREES) {
        return Err(Error::TooManyTrees {
            count: count.to_string(),
            limit: MAX_ENUMERATED_TREES,
        });
    }
    Ok(TreeEnumerator {
        n: d.n(),
        next: Some(symbol_multiset(d)),
    })
}

/// Distinct permutations of a sorted Prüfer multiset, decoded in order.
#[derive(Debug, Clone)]
pub struct TreeEnumerator {
    n: usize,
    next: Option<Vec<u32>>,
}

impl Iterator for TreeEnumerator {
    type Item = LabeledTree;

    fn next(&mut self) -> Option<LabeledTree> {
        let symbols = self.next.take()?;
        let tree = prufer_decode(&PruferSequence {
            n: self.n,
            symbols: symbols.clone(),
        });
        let mut successor = symbols;
        if next_permutation(&mut successor) {
            self.next = Some(successor);
        }
        Some(tree)
    }
}

fn next_permutation(v: &mut [u32]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let Some(i) = (0..v.len() - 1).rev().find(|&i| v[i] < v[i + 1]) else {
        return false;
    };
    let j = (i + 1..v.len())
        .rev()
        .find(|&j| v[j] > v[i])
        .expect("pivot");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// All `n^(n-2)` labeled trees on `n` nodes, in Prüfer-code order.
pub fn all_labeled_trees(n: usize) -> impl Iterator<Item = LabeledTree> {
    assert!(n >= 2, "need at least two nodes");
    let len = n - 2;
    let total = (n as u64).pow(len as u32);
    (0..total).map(move |mut code| {
        let mut symbols = vec![0u32; len];
        for slot in symbols.iter_mut().rev() {
            *slot = (code % n as u64) as u32;
            code /= n as u64;
        }
        prufer_decode(&PruferSequence { n, symbols })
    })
}

/// `P(T(D_n) = tree) = P(D_n = D_T) / count_trees(D_T)`.
pub fn tree_probability(model: &DegreeModel, tree: &LabeledTree) -> Result<BigRational> {
    let d = tree.degree_sequence();
    let mass = model.prefix_probability(tree.n(), d.degrees())?;
    Ok(mass / from_uint(count_trees(&d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;
    use crate::degree_model::enumerate_degree_sequences;
    use num_traits::Zero;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn seq(degrees: &[u32]) -> DegreeSequence {
        validate_degree_sequence(degrees.to_vec()).unwrap()
    }

    #[test]
    fn decode_examples() {
        // 1-based (2) is symbol 1
        let t = prufer_decode(&PruferSequence::new(3, vec![1]).unwrap());
        assert_eq!(t.edges(), vec![(0, 1), (1, 2)]);
        let t = prufer_decode(&PruferSequence::new(2, vec![]).unwrap());
        assert_eq!(t.edges(), vec![(0, 1)]);
        let t = prufer_decode(&PruferSequence::new(4, vec![0, 0]).unwrap());
        assert_eq!(t.edges(), vec![(0, 1), (0, 2), (0, 3)]);
    }

    #[test]
    fn encode_examples() {
        let path = LabeledTree::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(prufer_encode(&path).symbols(), &[1]);
        let star = LabeledTree::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(prufer_encode(&star).symbols(), &[0, 0]);
    }

    #[test]
    fn rejects_bad_codes_and_trees() {
        assert_eq!(
            PruferSequence::new(4, vec![0, 4]),
            Err(Error::SymbolOutOfRange { symbol: 4, n: 4 })
        );
        assert!(LabeledTree::from_edges(4, &[(0, 1), (1, 0), (2, 3)]).is_err());
        assert!(LabeledTree::from_edges(4, &[(0, 1), (1, 2), (2, 0)]).is_err());
        assert!(LabeledTree::from_edges(3, &[(0, 0), (1, 2)]).is_err());
    }

    #[test]
    fn bijection_exhaustive_small_n() {
        for n in 2..=7usize {
            let mut count = 0u64;
            for tree in all_labeled_trees(n) {
                let code = prufer_encode(&tree);
                assert_eq!(prufer_decode(&code), tree);
                let degrees = tree.degrees();
                for (i, &d) in degrees.iter().enumerate() {
                    let mult = code.symbols().iter().filter(|&&s| s as usize == i).count();
                    assert_eq!(mult + 1, d as usize);
                }
                count += 1;
            }
            assert_eq!(count, (n as u64).pow(n as u32 - 2));
        }
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_trees(&seq(&[2, 2, 1, 1])), BigUint::from(2u32));
        assert_eq!(count_trees(&seq(&[4, 1, 1, 1, 1])), BigUint::from(1u32));
        let total: BigUint = enumerate_degree_sequences(4)
            .unwrap()
            .iter()
            .map(count_trees)
            .sum();
        assert_eq!(total, BigUint::from(16u32));
    }

    #[test]
    fn enumeration_matches_count() {
        let trees: Vec<_> = enumerate_trees(&seq(&[2, 2, 1, 1])).unwrap().collect();
        let edge_sets: Vec<_> = trees.iter().map(LabeledTree::edges).collect();
        // 1-based {13,12,24} and {14,12,23}
        assert_eq!(
            edge_sets,
            vec![vec![(0, 1), (0, 2), (1, 3)], vec![(0, 1), (0, 3), (1, 2)]]
        );
        assert_eq!(enumerate_trees(&seq(&[3, 1, 1, 1])).unwrap().count(), 1);
        for d in enumerate_degree_sequences(6).unwrap() {
            let mut trees: Vec<_> = enumerate_trees(&d).unwrap().collect();
            let len = trees.len();
            trees.sort();
            trees.dedup();
            assert_eq!(trees.len(), len);
            assert_eq!(BigUint::from(len), count_trees(&d));
            assert!(trees.iter().all(|t| t.degree_sequence() == d));
        }
    }

    #[test]
    fn sampler_respects_degrees() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let star = seq(&[3, 1, 1, 1]);
        for _ in 0..10 {
            assert_eq!(
                sample_tree(&star, &mut rng).edges(),
                vec![(0, 1), (0, 2), (0, 3)]
            );
        }
        assert_eq!(sample_tree(&seq(&[1, 1]), &mut rng).edges(), vec![(0, 1)]);
        let d = seq(&[3, 1, 2, 1, 2, 1, 1, 3]);
        for _ in 0..50 {
            assert_eq!(sample_tree(&d, &mut rng).degree_sequence(), d);
        }
    }

    #[test]
    fn tree_probability_examples() {
        let fixed = DegreeModel::fixed(vec![2, 2, 1, 1]).unwrap();
        // path 3-1-2-4 (1-based)
        let path = LabeledTree::from_edges(4, &[(2, 0), (0, 1), (1, 3)]).unwrap();
        assert_eq!(tree_probability(&fixed, &path).unwrap(), rational(1, 12));
        let star_at_2 = LabeledTree::from_edges(4, &[(1, 0), (1, 2), (1, 3)]).unwrap();
        assert_eq!(
            tree_probability(&DegreeModel::Star, &star_at_2).unwrap(),
            rational(1, 4)
        );
        assert!(tree_probability(&fixed, &star_at_2).unwrap().is_zero());
    }

    #[test]
    fn edge_list_round_trip() {
        let t = LabeledTree::from_edges(4, &[(2, 0), (0, 1), (1, 3)]).unwrap();
        let text = t.to_edge_list();
        assert_eq!(text, "4\n1 2\n1 3\n2 4\n");
        assert_eq!(LabeledTree::parse_edge_list(&text).unwrap(), t);
        assert!(LabeledTree::parse_edge_list("3\n0 1\n1 2\n").is_err());
    }
}
